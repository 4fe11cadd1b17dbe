#pragma once

#include <string>
#include <utility>
#include <vector>

#include "prosodyrl/metrics.hpp"
#include "prosodyrl/rl_train.hpp"
#include "prosodyrl/salience_train.hpp"

namespace prosody {

// All writers emit UTF-8 CSV with a header row and stable number formatting,
// so reruns with identical values produce byte-identical files.

void write_metrics_csv(const std::string& path,
                       const std::vector<std::pair<std::string, double>>& rows);

// 5x5 grid of counts, rows = true class, columns = predicted class.
void write_confusion_csv(const std::string& path, const ConfusionMatrix& cm);

struct ScoreChangeRow {
  std::string id;
  int target = 0;
  double before = 0.0;
  double after = 0.0;
  bool no_segments = false;
};

void write_score_changes_csv(const std::string& path, const std::vector<ScoreChangeRow>& rows);

void write_salience_training_log_csv(const std::string& path,
                                     const std::vector<SalienceEpochLog>& log);
void write_agent_training_log_csv(const std::string& path, const std::vector<AgentStepLog>& log);

// Column documentation for every report this library writes.
void write_reports_readme(const std::string& dir);

// Flat `key=value` lines recording the fully resolved run configuration.
void write_resolved_config(const std::string& path,
                           const std::vector<std::pair<std::string, std::string>>& entries);

}  // namespace prosody
