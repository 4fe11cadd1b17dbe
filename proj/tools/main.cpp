#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "prosodyrl/agent.hpp"
#include "prosodyrl/bandit.hpp"
#include "prosodyrl/edits.hpp"
#include "prosodyrl/errors.hpp"
#include "prosodyrl/mask_prior.hpp"
#include "prosodyrl/reports.hpp"
#include "prosodyrl/rl_train.hpp"
#include "prosodyrl/salience_train.hpp"
#include "prosodyrl/synth.hpp"
#include "prosodyrl/wav_io.hpp"
#include "prosodyrl/wsola.hpp"

namespace {

using namespace prosody;

// Flat key=value hyperparameter overrides; every bound key is also recorded
// into the resolved config file.
class Overrides {
 public:
  void bind(const std::string& key, double* p) {
    set_[key] = [p](const std::string& v) { *p = std::stod(v); };
    get_[key] = [p] { return format_double(*p); };
  }
  void bind(const std::string& key, float* p) {
    set_[key] = [p](const std::string& v) { *p = std::stof(v); };
    get_[key] = [p] { return format_float(*p); };
  }
  void bind(const std::string& key, int* p) {
    set_[key] = [p](const std::string& v) { *p = std::stoi(v); };
    get_[key] = [p] { return std::to_string(*p); };
  }
  void bind(const std::string& key, uint64_t* p) {
    set_[key] = [p](const std::string& v) { *p = std::stoull(v); };
    get_[key] = [p] { return std::to_string(*p); };
  }
  void bind(const std::string& key, bool* p) {
    set_[key] = [p](const std::string& v) {
      if (v == "1" || v == "true") {
        *p = true;
      } else if (v == "0" || v == "false") {
        *p = false;
      } else {
        throw CLI::ValidationError("--set", "boolean override expects 0/1/true/false");
      }
    };
    get_[key] = [p] { return std::string(*p ? "1" : "0"); };
  }

  void apply(const std::vector<std::string>& pairs) const {
    for (const std::string& kv : pairs) {
      const std::size_t eq = kv.find('=');
      if (eq == std::string::npos)
        throw CLI::ValidationError("--set", "expected key=value, got '" + kv + "'");
      const std::string key = kv.substr(0, eq);
      const auto it = set_.find(key);
      if (it == set_.end()) throw CLI::ValidationError("--set", "unknown key '" + key + "'");
      try {
        it->second(kv.substr(eq + 1));
      } catch (const std::invalid_argument&) {
        throw CLI::ValidationError("--set", "bad value in '" + kv + "'");
      } catch (const std::out_of_range&) {
        throw CLI::ValidationError("--set", "value out of range in '" + kv + "'");
      }
    }
  }

  void record(std::vector<std::pair<std::string, std::string>>& into) const {
    for (const auto& [key, getter] : get_) into.emplace_back(key, getter());
  }

 private:
  static std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    for (int prec = 1; prec <= 16; ++prec) {
      char shorter[64];
      std::snprintf(shorter, sizeof(shorter), "%.*g", prec, x);
      double back = 0.0;
      std::sscanf(shorter, "%lf", &back);
      if (back == x) return shorter;
    }
    return buf;
  }

  static std::string format_float(float x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", x);
    for (int prec = 1; prec <= 8; ++prec) {
      char shorter[64];
      std::snprintf(shorter, sizeof(shorter), "%.*g", prec, x);
      float back = 0.0f;
      std::sscanf(shorter, "%f", &back);
      if (back == x) return shorter;
    }
    return buf;
  }

  std::map<std::string, std::function<void(const std::string&)>> set_;
  std::map<std::string, std::function<std::string()>> get_;
};

void bind_salience(Overrides& ov, SalienceConfig& cfg) {
  ov.bind("lambda_prior", &cfg.lambda_prior);
  ov.bind("lambda_sparse", &cfg.lambda_sparse);
  ov.bind("sparsity_target", &cfg.sparsity_target);
  ov.bind("energy_gate_db", &cfg.energy_gate_db);
  ov.bind("prior_stay", &cfg.prior.p_stay);
  ov.bind("prior_init", &cfg.prior.p_init);
}

std::vector<CorpusEntry> load_slice(const std::string& manifest, int skip, int take) {
  std::vector<CorpusEntry> corpus = load_manifest(manifest);
  require(skip >= 0 && skip <= static_cast<int>(corpus.size()), Error::Kind::BadArgument,
          "--skip beyond the manifest");
  corpus.erase(corpus.begin(), corpus.begin() + skip);
  if (take >= 0 && take < static_cast<int>(corpus.size()))
    corpus.erase(corpus.begin() + take, corpus.end());
  require(!corpus.empty(), Error::Kind::EmptyCorpus, "manifest slice is empty");
  return corpus;
}

void start_report_dir(const std::string& dir,
                      const std::vector<std::pair<std::string, std::string>>& config) {
  std::filesystem::create_directories(dir);
  write_resolved_config(dir + "/config.txt", config);
  write_reports_readme(dir);
}

int run_gen_corpus(const std::string& out_dir, int per_class, uint64_t seed,
                   SyntheticSpec& spec, const Overrides& ov) {
  std::vector<std::pair<std::string, std::string>> config = {
      {"subcommand", "gen-corpus"}, {"out", out_dir}, {"per_class", std::to_string(per_class)},
      {"seed", std::to_string(seed)}};
  ov.record(config);
  const std::string manifest = gen_corpus(spec, per_class, out_dir, seed);
  write_resolved_config(out_dir + "/config.txt", config);
  std::cout << manifest << "\n";
  return 0;
}

int run_train_salience(const std::string& manifest, const std::string& out_dir, int skip,
                       int take, SalienceTrainConfig& cfg, const Overrides& ov) {
  std::vector<std::pair<std::string, std::string>> config = {
      {"subcommand", "train-salience"}, {"manifest", manifest}, {"out", out_dir},
      {"skip", std::to_string(skip)},   {"take", std::to_string(take)}};
  ov.record(config);
  start_report_dir(out_dir, config);

  const std::vector<CorpusEntry> corpus = load_slice(manifest, skip, take);
  const SalienceModel model;
  const SalienceTrainResult result = train_salience(corpus, model, cfg);
  result.store.save(out_dir + "/salience.pten");
  write_salience_training_log_csv(out_dir + "/training_log.csv", result.log);

  const SalienceEpochLog& last = result.log.back();
  std::cout << "trained " << corpus.size() << " utterances for " << result.log.size()
            << " epochs; final mean loss " << last.mean_loss << "\n";
  return 0;
}

int run_eval_salience(const std::string& manifest, const std::string& model_path,
                      const std::string& out_dir, int skip, int take, uint64_t seed,
                      SalienceConfig& cfg, const Overrides& ov) {
  std::vector<std::pair<std::string, std::string>> config = {
      {"subcommand", "eval-salience"}, {"manifest", manifest}, {"model", model_path},
      {"out", out_dir},                {"skip", std::to_string(skip)},
      {"take", std::to_string(take)},  {"seed", std::to_string(seed)}};
  ov.record(config);
  start_report_dir(out_dir, config);

  const std::vector<CorpusEntry> corpus = load_slice(manifest, skip, take);
  ad::ParamStore store = ad::ParamStore::load(model_path);
  const SalienceModel model;
  const SalienceMetrics metrics = eval_salience(store, model, corpus, cfg, seed);

  write_metrics_csv(out_dir + "/metrics.csv",
                    {{"items", static_cast<double>(corpus.size())},
                     {"top1", metrics.top1},
                     {"top2", metrics.top2},
                     {"macro_f1", metrics.macro_f1},
                     {"weighted_f1", metrics.weighted_f1},
                     {"median_iou", metrics.median_iou}});
  write_confusion_csv(out_dir + "/confusion.csv", metrics.confusion);

  std::cout << "top1 " << metrics.top1 << "  top2 " << metrics.top2 << "  macro_f1 "
            << metrics.macro_f1 << "  median_iou " << metrics.median_iou << "\n";
  return 0;
}

int run_train_agent(const std::string& manifest, const std::string& salience_path,
                    const std::string& out_dir, int skip, int take, AgentTrainConfig& cfg,
                    const Overrides& ov) {
  std::vector<std::pair<std::string, std::string>> config = {
      {"subcommand", "train-agent"},  {"manifest", manifest}, {"salience", salience_path},
      {"out", out_dir},               {"skip", std::to_string(skip)},
      {"take", std::to_string(take)}};
  ov.record(config);
  start_report_dir(out_dir, config);

  const std::vector<CorpusEntry> corpus = load_slice(manifest, skip, take);
  ad::ParamStore salience_store = ad::ParamStore::load(salience_path);
  const SalienceModel salience_model;
  const AgentModel agent_model;
  const AgentTrainResult result =
      train_agent(corpus, salience_store, salience_model, agent_model, cfg);
  result.store.save(out_dir + "/agent.pten");
  write_agent_training_log_csv(out_dir + "/training_log.csv", result.log);

  const double final_avg = result.log.empty() ? 0.0 : result.log.back().reward_avg;
  std::cout << "trained " << cfg.steps << " steps (" << result.skipped
            << " skipped); final moving-average reward " << final_avg << "\n";
  return 0;
}

int run_convert_single(const std::string& in_path, const std::string& out_path, int target,
                       const std::string& agent_path, const std::string& salience_path,
                       bool greedy, uint64_t seed, AgentTrainConfig& cfg) {
  ad::ParamStore agent_store = ad::ParamStore::load(agent_path);
  ad::ParamStore salience_store = ad::ParamStore::load(salience_path);
  const AgentModel agent_model;
  const SalienceModel salience_model;

  const AudioBuffer audio = read_wav(in_path);
  ConvertReport report;
  const AudioBuffer out =
      convert(audio, target, agent_store, agent_model, salience_store, salience_model, cfg,
              greedy ? ConvertPolicy::Greedy : ConvertPolicy::Sample, seed, &report);
  write_wav(out_path, out);

  std::cout << "segment_start,segment_end,alpha,beta,gain\n";
  for (const SegmentEditReport& seg : report.segments)
    std::cout << seg.begin << "," << seg.end << "," << seg.duration_factor << ","
              << seg.pitch_factor << "," << seg.gain << "\n";
  std::cout << "score_before";
  for (int i = 0; i < kNumEmotions; ++i) std::cout << "," << report.before[i];
  std::cout << "\nscore_after";
  for (int i = 0; i < kNumEmotions; ++i) std::cout << "," << report.after[i];
  std::cout << "\ntarget_delta," << report.reward << "\n";
  if (report.no_segments) std::cout << "no_segments,1\n";
  return 0;
}

int run_convert_manifest(const std::string& manifest, const std::string& out_dir, int target,
                         const std::string& agent_path, const std::string& salience_path,
                         bool greedy, uint64_t seed, int skip, int take, AgentTrainConfig& cfg,
                         const Overrides& ov) {
  std::vector<std::pair<std::string, std::string>> config = {
      {"subcommand", "convert"},
      {"manifest", manifest},
      {"agent", agent_path},
      {"salience", salience_path},
      {"out", out_dir},
      {"target", target >= 0 ? kEmotionNames[static_cast<std::size_t>(target)] : "drawn"},
      {"greedy", greedy ? "1" : "0"},
      {"seed", std::to_string(seed)},
      {"skip", std::to_string(skip)},
      {"take", std::to_string(take)}};
  ov.record(config);
  start_report_dir(out_dir, config);

  const std::vector<CorpusEntry> corpus = load_slice(manifest, skip, take);
  ad::ParamStore agent_store = ad::ParamStore::load(agent_path);
  ad::ParamStore salience_store = ad::ParamStore::load(salience_path);
  const AgentModel agent_model;
  const SalienceModel salience_model;
  const Rng master(seed);

  std::vector<ScoreChangeRow> rows;
  double delta_sum = 0.0;
  int converted = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const AudioBuffer audio = read_wav(corpus[i].path);
    Rng item = master.substream("convert", static_cast<uint64_t>(i));
    int t = target;
    if (t < 0) {
      t = item.uniform_int(kNumEmotions - 1);
      if (t >= corpus[i].saliency.argmax()) ++t;
    }
    ConvertReport report;
    convert(audio, t, agent_store, agent_model, salience_store, salience_model, cfg,
            greedy ? ConvertPolicy::Greedy : ConvertPolicy::Sample,
            item.substream("actions").seed(), &report);
    rows.push_back({corpus[i].id, t, static_cast<double>(report.before[t]),
                    static_cast<double>(report.after[t]), report.no_segments});
    if (!report.no_segments) {
      delta_sum += report.reward;
      ++converted;
    }
  }

  const double mean_delta = converted > 0 ? delta_sum / converted : 0.0;
  write_score_changes_csv(out_dir + "/score_changes.csv", rows);
  write_metrics_csv(out_dir + "/metrics.csv",
                    {{"items", static_cast<double>(rows.size())},
                     {"converted", static_cast<double>(converted)},
                     {"no_segments", static_cast<double>(rows.size()) - converted},
                     {"mean_target_delta", mean_delta}});
  std::cout << "converted " << converted << "/" << rows.size() << "; mean target delta "
            << mean_delta << "\n";
  return 0;
}

int run_stretch(const std::string& in_path, const std::string& out_path, double factor,
                double pitch, double gain) {
  const AudioBuffer audio = read_wav(in_path);
  SegmentEdit edit;
  edit.begin = 0;
  edit.end = static_cast<int64_t>(audio.samples.size());
  edit.duration_factor = static_cast<float>(factor);
  edit.pitch_factor = static_cast<float>(pitch);
  edit.gain = static_cast<float>(gain);
  const WsolaParams params;
  const AudioBuffer out = apply_edits(audio, {edit}, params);
  write_wav(out_path, out);
  std::cout << audio.samples.size() << " samples in, " << out.samples.size() << " out\n";
  return 0;
}

int run_selfcheck() {
  int failures = 0;
  const auto report = [&](const char* name, bool ok) {
    std::cout << name << ": " << (ok ? "pass" : "fail") << "\n";
    if (!ok) ++failures;
  };

  {
    bool ok = true;
    for (int len : {64, 256, 512, 1024}) {
      const std::vector<float> w = hann_window(len);
      const int hop = len / 2;
      // Interior samples see exactly two overlapping windows.
      for (int n = 0; n < hop && ok; ++n) {
        const double sum = static_cast<double>(w[static_cast<std::size_t>(n)]) +
                           static_cast<double>(w[static_cast<std::size_t>(n + hop)]);
        ok = std::fabs(sum - 1.0) <= 1e-6;
      }
    }
    report("overlap-add windows sum to one", ok);
  }

  {
    Rng rng(404);
    bool ok = true;
    for (int trial = 0; trial < 50 && ok; ++trial) {
      MarkovPrior prior;
      prior.p_stay = rng.uniform(0.05, 0.95);
      prior.p_init = rng.uniform(0.05, 0.95);
      MaskPosterior post;
      const int frames = 1 + rng.uniform_int(8);
      for (int i = 0; i < frames; ++i) post.q.push_back(rng.uniform(0.02, 0.98));
      ok = std::fabs(prior_kl_chain(post, prior) - prior_kl_bruteforce(post, prior)) <= 1e-8;
    }
    report("mask prior chain matches enumeration", ok);
  }

  {
    const BanditReport bandit = reinforce_bandit_check(2024);
    report("policy gradient estimator unbiased", bandit.estimator_within_2se);
    report("baseline reduces estimator variance",
           bandit.variance_with_baseline < bandit.variance_without_baseline);
    report("bandit policy converges to the best arm",
           bandit.steps_to_confident >= 0 && bandit.steps_to_confident <= 2000 &&
               bandit.final_policy[0] >= 0.95);
  }

  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"prosody modification toolkit"};
  app.require_subcommand(1);

  // gen-corpus
  auto* gen = app.add_subcommand("gen-corpus", "synthesize a labeled corpus");
  std::string gen_out;
  int gen_per_class = 100;
  uint64_t gen_seed = 1234;
  std::vector<std::string> gen_sets;
  SyntheticSpec gen_spec;
  Overrides gen_ov;
  gen_ov.bind("utterance_seconds", &gen_spec.utterance_seconds);
  gen_ov.bind("cue_fraction", &gen_spec.cue_fraction);
  gen_ov.bind("label_noise_scale", &gen_spec.label_noise_scale);
  gen_ov.bind("silence_seconds", &gen_spec.silence_seconds);
  gen_ov.bind("base_amplitude", &gen_spec.base_amplitude);
  gen_ov.bind("noise_floor", &gen_spec.noise_floor);
  gen_ov.bind("syllable_hz", &gen_spec.syllable_hz);
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--per-class", gen_per_class, "utterances per emotion class");
  gen->add_option("--seed", gen_seed, "master seed");
  gen->add_option("--set", gen_sets, "spec override key=value");

  // train-salience
  auto* ts = app.add_subcommand("train-salience", "train the emotion saliency model");
  std::string ts_manifest, ts_out;
  int ts_skip = 0, ts_take = -1;
  std::vector<std::string> ts_sets;
  SalienceTrainConfig ts_cfg;
  Overrides ts_ov;
  ts_ov.bind("epochs", &ts_cfg.epochs);
  ts_ov.bind("lr", &ts_cfg.lr);
  ts_ov.bind("temperature_start", &ts_cfg.temperature_start);
  ts_ov.bind("temperature_end", &ts_cfg.temperature_end);
  ts_ov.bind("seed", &ts_cfg.seed);
  bind_salience(ts_ov, ts_cfg.salience);
  ts->add_option("--manifest", ts_manifest, "corpus manifest csv")->required();
  ts->add_option("--out", ts_out, "output directory")->required();
  ts->add_option("--epochs", ts_cfg.epochs, "training epochs");
  ts->add_option("--seed", ts_cfg.seed, "master seed");
  ts->add_option("--skip", ts_skip, "skip the first N manifest rows");
  ts->add_option("--take", ts_take, "use at most N rows after skipping");
  ts->add_option("--set", ts_sets, "hyperparameter override key=value");

  // eval-salience
  auto* es = app.add_subcommand("eval-salience", "evaluate a saliency model");
  std::string es_manifest, es_model, es_out;
  int es_skip = 0, es_take = -1;
  uint64_t es_seed = 1234;
  std::vector<std::string> es_sets;
  SalienceConfig es_cfg;
  Overrides es_ov;
  bind_salience(es_ov, es_cfg);
  es->add_option("--manifest", es_manifest, "corpus manifest csv")->required();
  es->add_option("--model", es_model, "trained salience tensors")->required();
  es->add_option("--out", es_out, "output directory")->required();
  es->add_option("--seed", es_seed, "mask sampling seed");
  es->add_option("--skip", es_skip, "skip the first N manifest rows");
  es->add_option("--take", es_take, "use at most N rows after skipping");
  es->add_option("--set", es_sets, "hyperparameter override key=value");

  // train-agent
  auto* ta = app.add_subcommand("train-agent", "train the conversion agent");
  std::string ta_manifest, ta_salience, ta_out;
  int ta_skip = 0, ta_take = -1;
  std::vector<std::string> ta_sets;
  AgentTrainConfig ta_cfg;
  Overrides ta_ov;
  ta_ov.bind("steps", &ta_cfg.steps);
  ta_ov.bind("lr", &ta_cfg.lr);
  ta_ov.bind("entropy_bonus", &ta_cfg.entropy_bonus);
  ta_ov.bind("duration_only", &ta_cfg.duration_only);
  ta_ov.bind("reward_window", &ta_cfg.reward_window);
  ta_ov.bind("seed", &ta_cfg.seed);
  bind_salience(ta_ov, ta_cfg.salience);
  ta->add_option("--manifest", ta_manifest, "corpus manifest csv")->required();
  ta->add_option("--salience", ta_salience, "trained salience tensors")->required();
  ta->add_option("--out", ta_out, "output directory")->required();
  ta->add_option("--steps", ta_cfg.steps, "environment steps");
  ta->add_option("--seed", ta_cfg.seed, "master seed");
  ta->add_option("--skip", ta_skip, "skip the first N manifest rows");
  ta->add_option("--take", ta_take, "use at most N rows after skipping");
  ta->add_option("--set", ta_sets, "hyperparameter override key=value");

  // convert
  auto* cv = app.add_subcommand("convert", "apply the agent to audio");
  std::string cv_in, cv_manifest, cv_out, cv_out_dir, cv_agent, cv_salience, cv_target;
  bool cv_greedy = false;
  uint64_t cv_seed = 1234;
  int cv_skip = 0, cv_take = -1;
  std::vector<std::string> cv_sets;
  AgentTrainConfig cv_cfg;
  Overrides cv_ov;
  cv_ov.bind("duration_only", &cv_cfg.duration_only);
  bind_salience(cv_ov, cv_cfg.salience);
  auto* cv_in_opt = cv->add_option("--in", cv_in, "input wav");
  auto* cv_manifest_opt = cv->add_option("--manifest", cv_manifest, "batch manifest csv");
  cv_in_opt->excludes(cv_manifest_opt);
  cv->add_option("--target", cv_target, "target emotion name");
  cv->add_option("--agent", cv_agent, "trained agent tensors")->required();
  cv->add_option("--salience", cv_salience, "trained salience tensors")->required();
  cv->add_option("--out", cv_out, "output wav (single-file mode)");
  cv->add_option("--out-dir", cv_out_dir, "report directory (manifest mode)");
  cv->add_flag("--greedy", cv_greedy, "argmax actions instead of sampling");
  cv->add_option("--seed", cv_seed, "sampling seed");
  cv->add_option("--skip", cv_skip, "skip the first N manifest rows");
  cv->add_option("--take", cv_take, "use at most N rows after skipping");
  cv->add_option("--set", cv_sets, "hyperparameter override key=value");

  // stretch
  auto* st = app.add_subcommand("stretch", "time-stretch a wav file");
  std::string st_in, st_out;
  double st_factor = 1.0, st_pitch = 1.0, st_gain = 1.0;
  st->add_option("--in", st_in, "input wav")->required();
  st->add_option("--out", st_out, "output wav")->required();
  st->add_option("--factor", st_factor, "duration factor")->required();
  st->add_option("--pitch", st_pitch, "pitch factor");
  st->add_option("--gain", st_gain, "amplitude factor");

  // selfcheck
  app.add_subcommand("selfcheck", "run built-in oracles and print pass/fail");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (gen->parsed()) {
      gen_ov.apply(gen_sets);
      gen_spec.validate();
      return run_gen_corpus(gen_out, gen_per_class, gen_seed, gen_spec, gen_ov);
    }
    if (ts->parsed()) {
      ts_ov.apply(ts_sets);
      ts_cfg.validate();
      return run_train_salience(ts_manifest, ts_out, ts_skip, ts_take, ts_cfg, ts_ov);
    }
    if (es->parsed()) {
      es_ov.apply(es_sets);
      es_cfg.validate();
      return run_eval_salience(es_manifest, es_model, es_out, es_skip, es_take, es_seed, es_cfg,
                               es_ov);
    }
    if (ta->parsed()) {
      ta_ov.apply(ta_sets);
      ta_cfg.validate();
      return run_train_agent(ta_manifest, ta_salience, ta_out, ta_skip, ta_take, ta_cfg, ta_ov);
    }
    if (cv->parsed()) {
      cv_ov.apply(cv_sets);
      cv_cfg.validate();
      int target = -1;
      if (!cv_target.empty()) {
        target = emotion_from_name(cv_target);
        if (target < 0) {
          std::cerr << "unknown emotion '" << cv_target << "'\n";
          return 2;
        }
      }
      if (!cv_manifest.empty()) {
        if (cv_out_dir.empty()) {
          std::cerr << "manifest mode needs --out-dir\n";
          return 2;
        }
        return run_convert_manifest(cv_manifest, cv_out_dir, target, cv_agent, cv_salience,
                                    cv_greedy, cv_seed, cv_skip, cv_take, cv_cfg, cv_ov);
      }
      if (cv_in.empty() || cv_out.empty()) {
        std::cerr << "single-file mode needs --in and --out\n";
        return 2;
      }
      if (target < 0) {
        std::cerr << "single-file mode needs --target\n";
        return 2;
      }
      return run_convert_single(cv_in, cv_out, target, cv_agent, cv_salience, cv_greedy, cv_seed,
                                cv_cfg);
    }
    if (st->parsed()) return run_stretch(st_in, st_out, st_factor, st_pitch, st_gain);
    return run_selfcheck();
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
