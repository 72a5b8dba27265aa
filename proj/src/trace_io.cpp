#include "lmaflow/trace_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lmaflow {

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_trace(const FlowTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace file " + path);
  const bool metric =
      !trace.records.empty() && trace.records.front().diag.has_metric;
  out << "t,mu_min,mu_max,sup_sigma,sup_d3_sq,sup_d4_sq,flow_residual";
  if (metric) out << ",ln_det_g_sup,phase_range";
  out << "\n";
  for (const auto& r : trace.records) {
    out << fmt17(r.t) << "," << fmt17(r.diag.mu_min) << ","
        << fmt17(r.diag.mu_max) << "," << fmt17(r.diag.sup_sigma) << ","
        << fmt17(r.diag.sup_d3_sq) << "," << fmt17(r.diag.sup_d4_sq) << ","
        << fmt17(r.diag.flow_residual);
    if (metric)
      out << "," << fmt17(r.diag.ln_det_g_sup) << ","
          << fmt17(r.diag.phase_range);
    out << "\n";
  }
  if (!out) throw std::runtime_error("trace write failed for " + path);
}

FlowTrace read_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read trace file " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("empty trace file " + path);
  const bool metric = line.find("ln_det_g_sup") != std::string::npos;
  if (line.rfind("t,mu_min", 0) != 0)
    throw std::runtime_error("bad trace header in " + path);

  FlowTrace trace;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
    const size_t expect = metric ? 9 : 7;
    if (vals.size() != expect)
      throw std::runtime_error("trace line " + std::to_string(lineno) +
                               ": expected " + std::to_string(expect) +
                               " columns");
    TraceRecord r;
    r.t = vals[0];
    r.diag.mu_min = vals[1];
    r.diag.mu_max = vals[2];
    r.diag.sup_sigma = vals[3];
    r.diag.sup_d3_sq = vals[4];
    r.diag.sup_d4_sq = vals[5];
    r.diag.flow_residual = vals[6];
    if (metric) {
      r.diag.has_metric = true;
      r.diag.ln_det_g_sup = vals[7];
      r.diag.phase_range = vals[8];
    }
    trace.records.push_back(r);
  }
  return trace;
}

}  // namespace lmaflow
