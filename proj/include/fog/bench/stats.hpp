#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "fog/serving/sim.hpp"

namespace fog::bench {

struct Stats {
  std::size_t n = 0;
  double mean = 0.0;
  double std = 0.0;  // sample std, n - 1 denominator; 0 when n == 1
  double p50 = 0.0;  // nearest rank: the ceil(p * n)-th smallest value
  double p95 = 0.0;
  double min = 0.0;
  double max = 0.0;
};

/// Throws Error on an empty sample.
Stats describe(std::vector<double> values);
double nearest_rank(const std::vector<double>& sorted, double p);

struct GroupSummary {
  std::string host;
  std::string model_id;
  std::size_t n = 0;
  Stats rtt;
  Stats inf;
};

struct TimingSummary {
  std::vector<GroupSummary> groups;  // ascending (host, model)
  std::vector<std::string> warnings;
};

/// Groups status-ok rows by (host, model). A group with no ok rows is left
/// out and noted in `warnings`.
TimingSummary summarize(const std::vector<serving::TimingRecord>& log);

/// Table value a report row can be compared against.
struct ReferenceRow {
  std::string host;
  std::string model_id;
  std::string label;  // display name, e.g. "Edge (GPU)"
  double rtt_mean = 0.0;
  double rtt_std = 0.0;
  double inf_mean = 0.0;
  double inf_std = 0.0;
};

enum class ReportFormat { csv, md };

ReportFormat parse_report_format(std::string_view text);

/// csv: host,model,n,rtt_mean,rtt_std,rtt_p50,rtt_p95,inf_mean,inf_std
/// md:  the same rows as a table, with reference columns when `refs` is non-empty.
std::string emit_report(const TimingSummary& summary, ReportFormat format, const std::vector<ReferenceRow>& refs = {});

/// One CSV row per request.
std::string emit_log_csv(const std::vector<serving::TimingRecord>& log);

}  // namespace fog::bench
