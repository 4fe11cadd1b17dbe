#include "prosodyrl/reports.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "prosodyrl/emotion.hpp"
#include "prosodyrl/errors.hpp"

namespace prosody {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), Error::Kind::IoError, "cannot open " + path + " for writing");
  return out;
}

// Shortest round-trip-safe decimal keeps the files stable across reruns.
std::string num(double x) {
  if (x == std::floor(x) && std::fabs(x) < 9.007199254740992e15) {
    char ibuf[32];
    std::snprintf(ibuf, sizeof(ibuf), "%lld", static_cast<long long>(x));
    return ibuf;
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  double back = 0.0;
  std::sscanf(buf, "%lf", &back);
  for (int prec = 1; prec <= 16; ++prec) {
    char shorter[64];
    std::snprintf(shorter, sizeof(shorter), "%.*g", prec, x);
    std::sscanf(shorter, "%lf", &back);
    if (back == x) return shorter;
  }
  return buf;
}

void close_checked(std::ofstream& out, const std::string& path) {
  out.flush();
  require(out.good(), Error::Kind::IoError, "failed writing " + path);
}

}  // namespace

void write_metrics_csv(const std::string& path,
                       const std::vector<std::pair<std::string, double>>& rows) {
  std::ofstream out = open_out(path);
  out << "metric,value\n";
  for (const auto& [name, value] : rows) out << name << "," << num(value) << "\n";
  close_checked(out, path);
}

void write_confusion_csv(const std::string& path, const ConfusionMatrix& cm) {
  std::ofstream out = open_out(path);
  out << "true_class";
  for (const char* name : kEmotionNames) out << ",pred_" << name;
  out << "\n";
  for (int r = 0; r < kNumEmotions; ++r) {
    out << kEmotionNames[static_cast<std::size_t>(r)];
    for (int c = 0; c < kNumEmotions; ++c)
      out << "," << cm.counts[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    out << "\n";
  }
  close_checked(out, path);
}

void write_score_changes_csv(const std::string& path, const std::vector<ScoreChangeRow>& rows) {
  std::ofstream out = open_out(path);
  out << "id,target,score_before,score_after,delta,no_segments\n";
  for (const ScoreChangeRow& row : rows) {
    out << row.id << "," << kEmotionNames[static_cast<std::size_t>(row.target)] << ","
        << num(row.before) << "," << num(row.after) << "," << num(row.after - row.before) << ","
        << (row.no_segments ? 1 : 0) << "\n";
  }
  close_checked(out, path);
}

void write_salience_training_log_csv(const std::string& path,
                                     const std::vector<SalienceEpochLog>& log) {
  std::ofstream out = open_out(path);
  out << "epoch,temperature,mean_loss,mean_l1,mean_prior,mean_sparse\n";
  for (const SalienceEpochLog& row : log) {
    out << row.epoch << "," << num(row.temperature) << "," << num(row.mean_loss) << ","
        << num(row.mean_l1) << "," << num(row.mean_prior) << "," << num(row.mean_sparse) << "\n";
  }
  close_checked(out, path);
}

void write_agent_training_log_csv(const std::string& path, const std::vector<AgentStepLog>& log) {
  std::ofstream out = open_out(path);
  out << "step,utterance,target,dur_index,pitch_index,gain_index,reward,actor_loss,critic_loss,"
         "reward_avg,skipped\n";
  for (const AgentStepLog& row : log) {
    out << row.step << "," << row.utterance << ","
        << kEmotionNames[static_cast<std::size_t>(row.target)] << "," << row.action.dur << ","
        << row.action.pitch << "," << row.action.gain << "," << num(row.reward) << ","
        << num(row.actor_loss) << "," << num(row.critic_loss) << "," << num(row.reward_avg) << ","
        << (row.skipped ? 1 : 0) << "\n";
  }
  close_checked(out, path);
}

void write_reports_readme(const std::string& dir) {
  const std::string path = dir + "/README.md";
  std::ofstream out = open_out(path);
  out << "# Report files\n"
         "\n"
         "All files are UTF-8 CSV with one header row.\n"
         "\n"
         "## metrics.csv\n"
         "`metric,value` pairs summarizing the run (accuracy, F1, IoU, mean\n"
         "score change, counts).\n"
         "\n"
         "## confusion.csv\n"
         "5x5 counts; `true_class` names the row, `pred_*` columns give how\n"
         "often that class was predicted for it.\n"
         "\n"
         "## score_changes.csv\n"
         "One row per converted utterance: `id`, the requested `target`\n"
         "emotion, the target-class salience score before and after editing,\n"
         "their `delta`, and `no_segments` = 1 when the input had no salient\n"
         "span and was returned unchanged.\n"
         "\n"
         "## training_log.csv\n"
         "Salience training: one row per epoch with the annealed Gumbel\n"
         "`temperature` and loss-term means.\n"
         "Agent training: one row per environment step with the sampled grid\n"
         "indices, `reward`, both losses, the windowed `reward_avg`, and\n"
         "`skipped` = 1 when the drawn utterance had no salient segments.\n"
         "\n"
         "## config.txt\n"
         "Flat `key=value` lines recording the fully resolved configuration\n"
         "and seed that produced this directory.\n";
  close_checked(out, path);
}

void write_resolved_config(const std::string& path,
                           const std::vector<std::pair<std::string, std::string>>& entries) {
  std::ofstream out = open_out(path);
  for (const auto& [key, value] : entries) out << key << "=" << value << "\n";
  close_checked(out, path);
}

}  // namespace prosody
