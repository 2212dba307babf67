#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "hexid/dataset.hpp"

namespace hexid {
namespace {

constexpr const char* kColumns[] = {"run_id", "t",       "T_c_in",  "T_c_sp",
                                    "T_h_in", "T_h_out", "T_c_out", "U_true"};

bool same(double a, double b) {
  return a == b || (std::isnan(a) && std::isnan(b));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& cell, const std::string& source,
                    std::size_t line, const char* column) {
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used == cell.size()) return v;
  } catch (const std::logic_error&) {
  }
  throw ParseError(source, line,
                   std::string("bad numeric value '") + cell + "' in column " + column);
}

void append_number(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

}  // namespace

ParseError::ParseError(const std::string& source, std::size_t line,
                       const std::string& what)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + what),
      line_(line) {}

std::size_t Dataset::sample_count() const {
  std::size_t n = 0;
  for (const auto& r : runs) n += r.size();
  return n;
}

std::size_t Dataset::samples_per_run() const {
  return runs.empty() ? 0 : runs.front().size();
}

double Dataset::sample_period() const {
  if (runs.empty() || runs.front().size() < 2) return 0.0;
  return runs.front()[1].t - runs.front()[0].t;
}

void Dataset::validate() const {
  if (runs.empty()) throw std::invalid_argument("dataset has no runs");
  const Run& first = runs.front();
  if (first.empty()) throw std::invalid_argument("dataset run 0 is empty");
  const double period = sample_period();
  for (std::size_t k = 1; k < first.size(); ++k) {
    const double expected = first[0].t + static_cast<double>(k) * period;
    if (std::abs(first[k].t - expected) > 1e-9 * std::max(1.0, std::abs(expected))) {
      throw std::invalid_argument("dataset sample grid is not uniform");
    }
  }
  for (std::size_t r = 0; r < runs.size(); ++r) {
    if (runs[r].size() != first.size()) {
      throw std::invalid_argument("dataset runs have different lengths");
    }
    for (std::size_t k = 0; k < first.size(); ++k) {
      const Sample& s = runs[r][k];
      if (s.run_id != static_cast<int>(r)) {
        throw std::invalid_argument("dataset run ids must be contiguous from 0");
      }
      if (s.t != first[k].t) {
        throw std::invalid_argument("dataset runs have different sample grids");
      }
    }
  }
}

Dataset Dataset::subset(const std::vector<int>& run_ids, bool renumber) const {
  Dataset out;
  out.has_u_true = has_u_true;
  out.provenance = provenance;
  for (int id : run_ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= runs.size()) {
      throw std::out_of_range("run id " + std::to_string(id) + " not in dataset");
    }
    Run r = runs[static_cast<std::size_t>(id)];
    if (renumber) {
      for (auto& s : r) s.run_id = static_cast<int>(out.runs.size());
    }
    out.runs.push_back(std::move(r));
  }
  return out;
}

bool operator==(const Dataset& a, const Dataset& b) {
  if (a.has_u_true != b.has_u_true || a.provenance != b.provenance ||
      a.runs.size() != b.runs.size()) {
    return false;
  }
  for (std::size_t r = 0; r < a.runs.size(); ++r) {
    if (a.runs[r].size() != b.runs[r].size()) return false;
    for (std::size_t k = 0; k < a.runs[r].size(); ++k) {
      const Sample& x = a.runs[r][k];
      const Sample& y = b.runs[r][k];
      if (x.run_id != y.run_id || !same(x.t, y.t) || !same(x.T_c_in, y.T_c_in) ||
          !same(x.T_c_sp, y.T_c_sp) || !same(x.T_h_in, y.T_h_in) ||
          !same(x.T_h_out, y.T_h_out) || !same(x.T_c_out, y.T_c_out) ||
          !same(x.U_true, y.U_true)) {
        return false;
      }
    }
  }
  return true;
}

void write_dataset(const Dataset& ds, std::ostream& out) {
  std::string buf;
  buf += ds.has_u_true ? kDatasetHeader : "run_id,t,T_c_in,T_c_sp,T_h_in,T_h_out,T_c_out";
  buf += '\n';
  for (const auto& run : ds.runs) {
    for (const auto& s : run) {
      buf += std::to_string(s.run_id);
      for (double v : {s.t, s.T_c_in, s.T_c_sp, s.T_h_in, s.T_h_out, s.T_c_out}) {
        buf += ',';
        append_number(buf, v);
      }
      if (ds.has_u_true) {
        buf += ',';
        append_number(buf, s.U_true);
      }
      buf += '\n';
    }
  }
  out << buf;
}

Dataset read_dataset(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError(source, 1, "empty file, expected header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line = line.substr(3);

  // Map header names onto column slots; U_true is optional.
  const auto header = split(line);
  int index[8];
  std::fill(std::begin(index), std::end(index), -1);
  for (std::size_t i = 0; i < header.size(); ++i) {
    bool known = false;
    for (int c = 0; c < 8; ++c) {
      if (header[i] == kColumns[c]) {
        if (index[c] != -1) throw ParseError(source, 1, "duplicate column " + header[i]);
        index[c] = static_cast<int>(i);
        known = true;
      }
    }
    if (!known) throw ParseError(source, 1, "malformed header: unknown column '" + header[i] + "'");
  }
  for (int c = 0; c < 7; ++c) {
    if (index[c] == -1) {
      throw ParseError(source, 1, std::string("missing column ") + kColumns[c]);
    }
  }

  Dataset ds;
  ds.has_u_true = index[7] != -1;
  double period = 0.0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw ParseError(source, line_no, "expected " + std::to_string(header.size()) +
                                            " cells, got " + std::to_string(cells.size()));
    }
    Sample s;
    const double id = parse_number(cells[static_cast<std::size_t>(index[0])], source, line_no, "run_id");
    if (id != std::floor(id) || id < 0) throw ParseError(source, line_no, "run_id must be a non-negative integer");
    s.run_id = static_cast<int>(id);
    double* fields[] = {&s.t, &s.T_c_in, &s.T_c_sp, &s.T_h_in, &s.T_h_out, &s.T_c_out, &s.U_true};
    for (int c = 1; c < 8; ++c) {
      if (index[c] == -1) continue;
      *fields[c - 1] = parse_number(cells[static_cast<std::size_t>(index[c])], source, line_no, kColumns[c]);
    }
    if (!ds.has_u_true) s.U_true = std::nan("");

    if (static_cast<std::size_t>(s.run_id) == ds.runs.size()) {
      ds.runs.emplace_back();
    } else if (static_cast<std::size_t>(s.run_id) + 1 != ds.runs.size()) {
      throw ParseError(source, line_no, "run ids must be contiguous from 0 and grouped");
    }
    Run& run = ds.runs.back();
    const std::size_t k = run.size();
    if (ds.runs.size() == 1) {
      if (k == 1) {
        period = s.t - run[0].t;
        if (!(period > 0.0)) throw ParseError(source, line_no, "sample times must increase");
      } else if (k > 1) {
        const double expected = run[0].t + static_cast<double>(k) * period;
        if (std::abs(s.t - expected) > 1e-9 * std::max(1.0, std::abs(expected))) {
          throw ParseError(source, line_no, "non-uniform sample grid");
        }
      }
    } else {
      const Run& ref = ds.runs.front();
      if (k >= ref.size() || s.t != ref[k].t) {
        throw ParseError(source, line_no, "sample grid differs from run 0");
      }
    }
    run.push_back(s);
  }
  if (ds.runs.empty()) throw ParseError(source, line_no, "no data rows");
  for (const auto& r : ds.runs) {
    if (r.size() != ds.runs.front().size()) {
      throw ParseError(source, line_no, "run " + std::to_string(r.front().run_id) +
                                            " is shorter than run 0");
    }
  }
  return ds;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_dataset(const Dataset& ds, const std::string& path) {
  std::ostringstream out;
  write_dataset(ds, out);
  write_file_atomic(path, out.str());
  if (!ds.provenance.empty()) write_file_atomic(path + ".meta.json", ds.provenance);
}

Dataset read_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, 0, "cannot open dataset");
  Dataset ds = read_dataset(in, path);
  const std::string meta = path + ".meta.json";
  if (std::filesystem::exists(meta)) ds.provenance = read_file(meta);
  return ds;
}

}  // namespace hexid
