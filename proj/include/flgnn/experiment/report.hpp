#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "flgnn/experiment/runner.hpp"

namespace flgnn::experiment {

// Fixed six-decimal rendering ("NA" for missing or non-finite values), so
// identical runs give byte-identical files.
std::string format_number(double value);

// variant,<client>,... with one row per variant; cells are fold means.
std::string result_table_csv(const ExperimentResult& result);
// The same layout holding sample standard deviations.
std::string result_table_std_csv(const ExperimentResult& result);
// Long format: variant,client,fold,run_id,accuracy,best_val_acc,test_at_best,final_test_acc,best_epoch
std::string result_cells_csv(const ExperimentResult& result);
std::string failures_csv(const ExperimentResult& result);
// Markdown "mean ± std" table for reading.
std::string result_table_markdown(const ExperimentResult& result);

std::string gap_curve_csv(const std::vector<GapPoint>& points);
std::string attack_report_csv(const std::vector<AttackRow>& rows);

// Rebuilds an ExperimentResult (cells only) from result_cells.csv; folds is
// taken as the number of distinct fold indices.
ExperimentResult read_result_cells(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);

// result_table.csv, result_table_std.csv, result_cells.csv, failures.csv,
// result_table.md and rounds.jsonl under `dir`.
void write_experiment(const std::filesystem::path& dir, const ExperimentResult& result);

}  // namespace flgnn::experiment
