#include "coolflex/training/walk_forward.hpp"

#include <string>

#include "coolflex/errors.hpp"

namespace coolflex::training {
namespace {

void check_months(int months) {
  if (months != 1 && months != 3 && months != 5 && months != 7) {
    throw ConfigError("walk-forward: training length must be 1, 3, 5 or 7 months, got " + std::to_string(months));
  }
}

}  // namespace

int required_days(int train_len_months) {
  check_months(train_len_months);
  return 30 * train_len_months + (kFoldCount - 1) * kFoldStrideDays + kTestDays;
}

std::vector<FoldPlan> walk_forward_folds(int train_len_months, int available_days) {
  const int need = required_days(train_len_months);
  if (available_days < need) {
    throw ConfigError("walk-forward: " + std::to_string(train_len_months) + "-month folds need " +
                      std::to_string(need) + " days, dataset has " + std::to_string(available_days));
  }
  std::vector<FoldPlan> folds;
  for (int k = 0; k < kFoldCount; ++k) {
    FoldPlan f;
    f.fold_index = k;
    f.train_start_day = kFoldStrideDays * k;
    f.train_len_days = 30 * train_len_months;
    folds.push_back(f);
  }
  return folds;
}

FoldPlan fold_plan(int train_len_months, int fold_index, int available_days) {
  if (fold_index < 0 || fold_index >= kFoldCount) {
    throw ConfigError("walk-forward: fold must be in 0..4, got " + std::to_string(fold_index));
  }
  return walk_forward_folds(train_len_months, available_days)[static_cast<std::size_t>(fold_index)];
}

}  // namespace coolflex::training
