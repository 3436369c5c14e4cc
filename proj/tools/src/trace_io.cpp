#include "amoo_cli/cli.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace amoo::cli {

namespace {

void put(std::string& line, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  line.append(buf, res.ptr);
}

void put(std::string& line, const std::optional<double>& v) {
  if (v) put(line, *v);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_double(const std::string& field, std::size_t row, const char* column) {
  double v = 0.0;
  const char* end = field.data() + field.size();
  const auto res = std::from_chars(field.data(), end, v);
  if (field.empty() || res.ec != std::errc() || res.ptr != end) {
    throw TraceError("line " + std::to_string(row) + ": bad value '" + field + "' in column " +
                     column);
  }
  return v;
}

std::optional<double> parse_optional(const std::string& field, std::size_t row, const char* column) {
  if (field.empty()) return std::nullopt;
  return parse_double(field, row, column);
}

}  // namespace

std::string trace_header(std::size_t m) {
  std::string h = "step";
  for (std::size_t i = 1; i <= m; ++i) h += ",f_" + std::to_string(i);
  for (std::size_t i = 1; i <= m; ++i) h += ",w_" + std::to_string(i);
  return h + ",grad_norm,residual,msq,lambda_min_est,pu_gap";
}

void write_trace_csv(std::ostream& out, const RunTrace& trace, std::size_t m) {
  out << trace_header(m) << '\n';
  std::string line;
  for (const auto& r : trace.records) {
    if (static_cast<std::size_t>(r.f.size()) != m || static_cast<std::size_t>(r.w.size()) != m) {
      throw ArgumentError("trace record width does not match m");
    }
    line = std::to_string(r.step);
    for (Eigen::Index i = 0; i < r.f.size(); ++i) {
      line += ',';
      put(line, r.f[i]);
    }
    for (Eigen::Index i = 0; i < r.w.size(); ++i) {
      line += ',';
      put(line, r.w[i]);
    }
    line += ',';
    put(line, r.grad_norm);
    for (const auto* v : {&r.residual, &r.msq, &r.lambda_min_est, &r.pu_gap}) {
      line += ',';
      put(line, *v);
    }
    out << line << '\n';
  }
}

void write_trace_csv(const std::filesystem::path& path, const RunTrace& trace, std::size_t m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  write_trace_csv(out, trace, m);
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

RunTrace read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw TraceError("empty trace");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto head = split(line);
  // step, m values, m weights, five scalars
  if (head.size() < 8 || (head.size() - 6) % 2 != 0) throw TraceError("unrecognized trace header");
  const std::size_t m = (head.size() - 6) / 2;
  if (line != trace_header(m)) throw TraceError("unrecognized trace header: '" + line + "'");

  RunTrace trace;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != head.size()) {
      throw TraceError("line " + std::to_string(row) + ": expected " + std::to_string(head.size()) +
                       " fields, found " + std::to_string(f.size()));
    }
    IterateRecord r;
    int step = 0;
    const auto res = std::from_chars(f[0].data(), f[0].data() + f[0].size(), step);
    if (f[0].empty() || res.ec != std::errc() || res.ptr != f[0].data() + f[0].size()) {
      throw TraceError("line " + std::to_string(row) + ": bad step '" + f[0] + "'");
    }
    r.step = step;
    r.f.resize(static_cast<Eigen::Index>(m));
    r.w.resize(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) {
      r.f[static_cast<Eigen::Index>(i)] = parse_double(f[1 + i], row, "f");
      r.w[static_cast<Eigen::Index>(i)] = parse_double(f[1 + m + i], row, "w");
    }
    std::size_t c = 1 + 2 * m;
    r.grad_norm = parse_double(f[c++], row, "grad_norm");
    r.residual = parse_optional(f[c++], row, "residual");
    r.msq = parse_optional(f[c++], row, "msq");
    r.lambda_min_est = parse_optional(f[c++], row, "lambda_min_est");
    r.pu_gap = parse_optional(f[c++], row, "pu_gap");
    trace.records.push_back(std::move(r));
  }
  return trace;
}

RunTrace read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw TraceError("cannot read trace '" + path.string() + "'");
  return read_trace_csv(in);
}

}  // namespace amoo::cli
