#pragma once

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace hexid {

/// One sampled row of a run. U_true is hidden ground truth; it is NaN when
/// the data came from a source without it.
struct Sample {
  int run_id = 0;
  double t = 0.0;
  double T_c_in = 0.0;
  double T_c_sp = 0.0;
  double T_h_in = 0.0;
  double T_h_out = 0.0;
  double T_c_out = 0.0;
  double U_true = 0.0;
};

using Run = std::vector<Sample>;

struct Dataset {
  std::vector<Run> runs;
  bool has_u_true = true;
  /// Generating configuration and seed, stored verbatim in the sidecar file.
  std::string provenance;

  std::size_t sample_count() const;
  std::size_t samples_per_run() const;
  double sample_period() const;

  /// Checks identical, uniform sample grids and contiguous run ids.
  void validate() const;

  /// Copy holding only the listed runs (run ids renumbered from 0 only when
  /// `renumber` is set).
  Dataset subset(const std::vector<int>& run_ids, bool renumber = false) const;
};

/// NaN-aware field-for-field equality, provenance included.
bool operator==(const Dataset& a, const Dataset& b);

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what);

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

inline constexpr const char* kDatasetHeader =
    "run_id,t,T_c_in,T_c_sp,T_h_in,T_h_out,T_c_out,U_true";

void write_dataset(const Dataset& ds, std::ostream& out);
Dataset read_dataset(std::istream& in, const std::string& source = "<stream>");

/// Writes `path` atomically. A non-empty provenance goes to `path.meta.json`.
void write_dataset(const Dataset& ds, const std::string& path);
Dataset read_dataset(const std::string& path);

/// Writes `content` to a temporary file next to `path` and renames it over.
void write_file_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace hexid
