#include "hexid/identifiability.hpp"

#include <Eigen/SVD>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace hexid {

VectorFieldsAt eval_vector_fields(const AugmentedState& x, const LumpedParams& lp) {
  const double dT = x.T_c_out - x.T_h_out;
  VectorFieldsAt v;
  v.g0 << -lp.alpha_h * x.K_p * x.T_c_out - lp.alpha_h * x.T_h_out,
      -lp.alpha_c * x.T_c_out, 0.0;
  v.f1 << lp.alpha_h * x.K_p, 0.0, 0.0;
  v.f2 << 0.0, lp.alpha_c, 0.0;
  v.g1 << lp.beta_h * dT, -lp.beta_c * dT, 0.0;
  return v;
}

RankReport numeric_rank(const Eigen::MatrixXd& m, double rel_tol) {
  if (!m.allFinite()) throw std::invalid_argument("numeric_rank: non-finite matrix entry");
  if (!(rel_tol > 0.0)) throw std::invalid_argument("numeric_rank: tolerance must be > 0");
  RankReport r;
  r.matrix = m;
  r.tolerance = rel_tol;
  if (m.size() == 0) return r;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const Eigen::VectorXd& s = svd.singularValues();
  r.singular_values.assign(s.data(), s.data() + s.size());
  const double sigma_max = s.size() > 0 ? s[0] : 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s[i] > rel_tol * sigma_max && s[i] > 0.0) ++r.rank;
  }
  return r;
}

RankReport observability_matrix(const AugmentedState& x, const LumpedParams& lp,
                                double rel_tol) {
  // L_g0 h1 = g0[0] and L_g0 h2 = g0[1]; their gradients w.r.t.
  // (T_h_out, T_c_out, K_p) are written out by hand.
  Eigen::Matrix<double, 4, 3> o;
  o << 1.0, 0.0, 0.0,
       0.0, 1.0, 0.0,
       -lp.alpha_h, -lp.alpha_h * x.K_p, -lp.alpha_h * x.T_c_out,
       0.0, -lp.alpha_c, 0.0;
  RankReport r = numeric_rank(o, rel_tol);
  r.verdict = r.rank == 3 ? "observable" : "not observable";
  return r;
}

RankReport reconstructibility_matrix(const AugmentedState& x, const LumpedParams& lp,
                                     double rel_tol) {
  const Eigen::Vector3d g1 = eval_vector_fields(x, lp).g1;
  Eigen::Matrix<double, 2, 1> rm;
  rm << g1[0], g1[1];
  RankReport r = numeric_rank(rm, rel_tol);
  r.verdict = r.rank == 1 ? "U reconstructible" : "U not reconstructible";
  return r;
}

IdentifiabilityReport identifiability_check(const std::vector<AugmentedState>& states,
                                            const LumpedParams& lp, double rel_tol) {
  if (states.empty()) throw std::invalid_argument("identifiability_check needs >= 1 state");
  constexpr int kUnknownInputs = 1;
  IdentifiabilityReport report;
  report.rel_tol = rel_tol;
  report.states.reserve(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    StateVerdict v{states[i], observability_matrix(states[i], lp, rel_tol),
                   reconstructibility_matrix(states[i], lp, rel_tol), false};
    v.identifiable = v.observability.rank == 3 && v.reconstructibility.rank == kUnknownInputs;
    if (!v.identifiable) report.failing.push_back(i);
    report.states.push_back(std::move(v));
  }
  return report;
}

std::string IdentifiabilityReport::to_text() const {
  std::ostringstream os;
  os << "identifiability of U(t): " << (all_identifiable() ? "identifiable" : "NOT identifiable")
     << " at " << (states.size() - failing.size()) << "/" << states.size() << " states\n";
  os << "rank rule: sigma_i > " << rel_tol << " * sigma_max (SVD)\n";
  if (!states.empty()) {
    const StateVerdict& v = states.front();
    os << "example state 0: observability rank " << v.observability.rank
       << ", reconstructibility rank " << v.reconstructibility.rank << "\n";
  }
  for (std::size_t i : failing) {
    const StateVerdict& v = states[i];
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "  failing state %zu: T_h_out=%.6f T_c_out=%.6f K_p=%.6g obs_rank=%d rec_rank=%d\n",
                  i, v.state.T_h_out, v.state.T_c_out, v.state.K_p, v.observability.rank,
                  v.reconstructibility.rank);
    os << buf;
  }
  return os.str();
}

std::string IdentifiabilityReport::to_csv() const {
  std::ostringstream os;
  os << "index,T_h_out,T_c_out,K_p,obs_rank,rec_rank,sigma_min_obs,sigma_rec,tolerance,identifiable\n";
  for (std::size_t i = 0; i < states.size(); ++i) {
    const StateVerdict& v = states[i];
    const auto& so = v.observability.singular_values;
    const auto& sr = v.reconstructibility.singular_values;
    char buf[320];
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%d,%d,%.17g,%.17g,%.3g,%d\n", i,
                  v.state.T_h_out, v.state.T_c_out, v.state.K_p, v.observability.rank,
                  v.reconstructibility.rank, so.empty() ? 0.0 : so.back(),
                  sr.empty() ? 0.0 : sr.front(), rel_tol, v.identifiable ? 1 : 0);
    os << buf;
  }
  return os.str();
}

}  // namespace hexid
