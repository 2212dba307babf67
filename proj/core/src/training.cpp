#include "hexid/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace hexid {

Split default_split(int n_runs) {
  if (n_runs < 2) throw std::invalid_argument("a train/validation split needs >= 2 runs");
  Split s;
  for (int r = 0; r < n_runs; ++r) {
    const bool held_out = n_runs >= 5 ? r % 5 == 4 : r == n_runs - 1;
    (held_out ? s.val : s.train).push_back(r);
  }
  return s;
}

void validate_split(const Split& s, int n_runs) {
  if (s.train.empty() || s.val.empty()) throw std::invalid_argument("split parts must be non-empty");
  std::vector<int> seen(static_cast<std::size_t>(n_runs), 0);
  for (const auto* part : {&s.train, &s.val}) {
    for (int r : *part) {
      if (r < 0 || r >= n_runs) throw std::invalid_argument("split references unknown run " + std::to_string(r));
      if (seen[static_cast<std::size_t>(r)]++) {
        throw std::invalid_argument("run " + std::to_string(r) + " appears twice in the split");
      }
    }
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw std::invalid_argument("split does not cover every run");
  }
}

void TrainConfig::validate() const {
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (patience < 1) throw std::invalid_argument("patience must be >= 1");
  if (!(min_rel_improvement >= 0.0)) throw std::invalid_argument("min_rel_improvement must be >= 0");
  if (!(residual_weight >= 0.0)) throw std::invalid_argument("residual weight W_R must be >= 0");
  adam.validate();
}

std::string LossHistory::to_csv() const {
  std::ostringstream os;
  os << "epoch,train_loss,val_loss,best_val_loss,data_loss,residual_loss\n";
  char buf[256];
  for (const LossRecord& r : records) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.epoch, r.train_loss,
                  r.val_loss, r.best_val_loss, r.data_loss, r.residual_loss);
    os << buf;
  }
  return os.str();
}

bool EarlyStopper::update(int epoch, double val) {
  if (best_epoch_ < 0 || val < best_ * (1.0 - min_rel_)) {
    best_ = val;
    best_epoch_ = epoch;
    return true;
  }
  return false;
}

}  // namespace hexid
