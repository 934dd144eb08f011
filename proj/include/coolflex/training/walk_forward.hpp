#pragma once

#include <vector>

namespace coolflex::training {

inline constexpr int kFoldCount = 5;
inline constexpr int kFoldStrideDays = 30;
inline constexpr int kTestDays = 5;

/// Train and test day ranges of one walk-forward fold, half-open.
struct FoldPlan {
  int fold_index = 0;
  int train_start_day = 0;
  int train_len_days = 0;
  int test_len_days = kTestDays;
  int window_stride = kFoldStrideDays;

  int train_end_day() const { return train_start_day + train_len_days; }
  int test_start_day() const { return train_end_day(); }
  int test_end_day() const { return test_start_day() + test_len_days; }
};

/// Days a dataset needs for all folds of a given training length.
int required_days(int train_len_months);

/// Fold k trains on [30k, 30k + 30 * months) and tests on the next 5 days.
/// Throws ConfigError for months outside {1, 3, 5, 7} or when
/// available_days is too short, naming the required length.
std::vector<FoldPlan> walk_forward_folds(int train_len_months, int available_days);

/// A single fold; throws ConfigError when fold_index is outside 0..4.
FoldPlan fold_plan(int train_len_months, int fold_index, int available_days);

}  // namespace coolflex::training
