#include "fog/bench/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>

namespace fog::bench {

double nearest_rank(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw Error("nearest_rank of an empty sample");
  const auto n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(p * n));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

Stats describe(std::vector<double> values) {
  if (values.empty()) throw Error("describe: empty sample");
  std::sort(values.begin(), values.end());
  Stats s;
  s.n = values.size();
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  s.p50 = nearest_rank(values, 0.50);
  s.p95 = nearest_rank(values, 0.95);
  s.min = values.front();
  s.max = values.back();
  return s;
}

TimingSummary summarize(const std::vector<serving::TimingRecord>& log) {
  struct Acc {
    std::vector<double> rtt, inf;
  };
  std::map<std::pair<std::string, std::string>, Acc> groups;
  for (const auto& r : log) {
    auto& g = groups[{r.host, r.model_id}];
    if (r.status != serving::Status::ok) continue;
    g.rtt.push_back(r.t_rtt_ms());
    g.inf.push_back(r.t_inf_ms());
  }
  TimingSummary out;
  for (auto& [key, acc] : groups) {
    if (acc.rtt.empty()) {
      out.warnings.push_back("no successful requests for host " + key.first + ", model " + key.second);
      continue;
    }
    GroupSummary g;
    g.host = key.first;
    g.model_id = key.second;
    g.n = acc.rtt.size();
    g.rtt = describe(std::move(acc.rtt));
    g.inf = describe(std::move(acc.inf));
    out.groups.push_back(std::move(g));
  }
  return out;
}

ReportFormat parse_report_format(std::string_view text) {
  if (text == "csv") return ReportFormat::csv;
  if (text == "md") return ReportFormat::md;
  throw Error("unknown report format '" + std::string(text) + "' (expected csv or md)");
}

namespace {

std::string fmt(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string pm(double mean, double std) { return fmt(mean, 2) + " ± " + fmt(std, 2); }

}  // namespace

std::string emit_report(const TimingSummary& summary, ReportFormat format, const std::vector<ReferenceRow>& refs) {
  std::string out;
  if (format == ReportFormat::csv) {
    out = "host,model,n,rtt_mean,rtt_std,rtt_p50,rtt_p95,inf_mean,inf_std\n";
    for (const auto& g : summary.groups)
      out += g.host + "," + g.model_id + "," + std::to_string(g.n) + "," + fmt(g.rtt.mean) + "," + fmt(g.rtt.std) +
             "," + fmt(g.rtt.p50) + "," + fmt(g.rtt.p95) + "," + fmt(g.inf.mean) + "," + fmt(g.inf.std) + "\n";
    return out;
  }

  const bool with_reference = !refs.empty();
  auto find_reference = [&](const GroupSummary& g) -> const ReferenceRow* {
    for (const auto& p : refs)
      if (p.host == g.host && p.model_id == g.model_id) return &p;
    return nullptr;
  };
  out = "| host | model | n | t_rtt (ms) | p50 | p95 | t_inf (ms) |";
  out += with_reference ? " ref t_rtt | ref t_inf |\n" : "\n";
  out += "|---|---|---:|---:|---:|---:|---:|";
  out += with_reference ? "---:|---:|\n" : "\n";
  for (const auto& g : summary.groups) {
    const auto* p = find_reference(g);
    const std::string host = p && !p->label.empty() ? p->label : g.host;
    out += "| " + host + " | " + g.model_id + " | " + std::to_string(g.n) + " | " + pm(g.rtt.mean, g.rtt.std) +
           " | " + fmt(g.rtt.p50, 2) + " | " + fmt(g.rtt.p95, 2) + " | " + pm(g.inf.mean, g.inf.std) + " |";
    if (with_reference) out += p ? " " + pm(p->rtt_mean, p->rtt_std) + " | " + pm(p->inf_mean, p->inf_std) + " |" : " | |";
    out += "\n";
  }
  if (with_reference)
    out += "\nSimulated distributions are truncated normals matched to the reference mean and std only.\n";
  return out;
}

std::string emit_log_csv(const std::vector<serving::TimingRecord>& log) {
  std::string out = "index,request_id,robot,host,model,status,t_send_us,arrival_us,start_us,finish_us,recv_us,"
                    "t_rtt_ms,t_inf_ms,queue_delay_ms\n";
  for (const auto& r : log)
    out += std::to_string(r.index) + "," + serving::request_id_hex(r.request_id) + "," + r.robot + "," + r.host + "," +
           r.model_id + "," + std::string(serving::to_string(r.status)) + "," + std::to_string(r.t_send) + "," +
           std::to_string(r.arrival) + "," + std::to_string(r.start) + "," + std::to_string(r.finish) + "," +
           std::to_string(r.recv) + "," + fmt(r.t_rtt_ms()) + "," + fmt(r.t_inf_ms()) + "," +
           fmt(r.queue_delay_ms()) + "\n";
  return out;
}

}  // namespace fog::bench
