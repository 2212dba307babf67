#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "hexid/adam.hpp"
#include "hexid/dataset.hpp"

namespace hexid {

/// Loss became non-finite or an integration blew up during training.
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Split {
  std::vector<int> train;
  std::vector<int> val;
};

/// Every fifth run (ids 4, 9, 14, ...) is held out; with fewer than five
/// runs the last run is. Needs at least two runs.
Split default_split(int n_runs);

/// Throws std::invalid_argument unless `s` is a disjoint cover of 0..n_runs-1
/// with both parts non-empty.
void validate_split(const Split& s, int n_runs);

struct TrainConfig {
  int epochs = 3000;
  AdamConfig adam;
  /// Stop when the validation loss has not improved for this many epochs.
  int patience = 500;
  /// An epoch counts as an improvement only below best * (1 - min_rel_improvement).
  double min_rel_improvement = 1e-6;
  double residual_weight = 1.0;  // PINN only
  std::uint64_t seed = 1234;
  /// Empty: default_split.
  Split split;
  /// Progress line to stderr every `log_every` epochs (0 = silent).
  int log_every = 0;

  void validate() const;
};

struct LossRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double best_val_loss = 0.0;
  double data_loss = 0.0;      // PINN: data term of train_loss
  double residual_loss = 0.0;  // PINN: unweighted residual term
};

struct LossHistory {
  std::vector<LossRecord> records;
  int best_epoch = -1;
  bool stopped_early = false;

  /// epoch,train_loss,val_loss,best_val_loss,data_loss,residual_loss
  std::string to_csv() const;
};

/// Best-so-far bookkeeping shared by both trainers.
class EarlyStopper {
 public:
  EarlyStopper(int patience, double min_rel_improvement)
      : patience_(patience), min_rel_(min_rel_improvement) {}
  /// True when `val` is a new best.
  bool update(int epoch, double val);
  bool should_stop(int epoch) const { return best_epoch_ >= 0 && epoch - best_epoch_ >= patience_; }
  double best() const { return best_; }
  int best_epoch() const { return best_epoch_; }

 private:
  int patience_;
  double min_rel_;
  double best_ = 0.0;
  int best_epoch_ = -1;
};

}  // namespace hexid
