#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "hexid/dataset.hpp"
#include "hexid/mlp.hpp"

namespace hexid {

void write_mlp(std::ostream& os, const MlpParams& p) {
  p.validate();
  os << "hexid-mlp 1\nwidths";
  for (int w : p.widths) os << ' ' << w;
  os << "\nactivation tanh\ncount " << p.param_count() << '\n';
  const Eigen::VectorXd flat = p.flatten();
  char buf[40];
  for (Eigen::Index i = 0; i < flat.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g\n", flat[i]);
    os << buf;
  }
}

MlpParams read_mlp(std::istream& is, const std::string& source) {
  std::string line;
  std::size_t lineno = 0;
  auto next = [&](const char* what) {
    if (!std::getline(is, line)) throw ParseError(source, lineno + 1, std::string("missing ") + what);
    ++lineno;
    return std::istringstream(line);
  };

  {
    auto ss = next("magic line");
    std::string magic;
    int version = 0;
    if (!(ss >> magic >> version) || magic != "hexid-mlp") {
      throw ParseError(source, lineno, "not a hexid-mlp checkpoint");
    }
    if (version != 1) throw ParseError(source, lineno, "unsupported version " + std::to_string(version));
  }
  std::vector<int> widths;
  {
    auto ss = next("widths");
    std::string key;
    ss >> key;
    if (key != "widths") throw ParseError(source, lineno, "expected 'widths'");
    int w = 0;
    while (ss >> w) widths.push_back(w);
    if (!ss.eof()) throw ParseError(source, lineno, "bad width value");
  }
  {
    auto ss = next("activation");
    std::string key, act;
    ss >> key >> act;
    if (key != "activation" || act != "tanh") {
      throw ParseError(source, lineno, "expected 'activation tanh'");
    }
  }
  MlpParams p;
  try {
    p = zero_params(widths);
  } catch (const std::invalid_argument& e) {
    throw ParseError(source, 2, e.what());
  }
  std::size_t count = 0;
  {
    auto ss = next("count");
    std::string key;
    if (!(ss >> key >> count) || key != "count") throw ParseError(source, lineno, "expected 'count N'");
    if (count != p.param_count()) {
      throw ParseError(source, lineno, "count " + std::to_string(count) + " does not match widths (" +
                                           std::to_string(p.param_count()) + ")");
    }
  }
  Eigen::VectorXd flat(static_cast<Eigen::Index>(count));
  for (std::size_t i = 0; i < count; ++i) {
    auto ss = next("parameter value");
    double v = 0.0;
    if (!(ss >> v)) throw ParseError(source, lineno, "bad parameter value '" + line + "'");
    if (!std::isfinite(v)) throw ParseError(source, lineno, "non-finite parameter value");
    flat[static_cast<Eigen::Index>(i)] = v;
  }
  p.unflatten(flat);
  return p;
}

}  // namespace hexid
