#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <string>
#include <vector>

#include "prosodyrl/agent.hpp"
#include "prosodyrl/bandit.hpp"
#include "prosodyrl/edits.hpp"
#include "prosodyrl/emotion.hpp"
#include "prosodyrl/errors.hpp"
#include "prosodyrl/f0.hpp"
#include "prosodyrl/mask_prior.hpp"
#include "prosodyrl/rl_train.hpp"
#include "prosodyrl/salience.hpp"
#include "prosodyrl/salience_train.hpp"
#include "prosodyrl/synth.hpp"
#include "prosodyrl/wav_io.hpp"
#include "prosodyrl/wsola.hpp"

namespace py = pybind11;
using namespace prosody;

namespace {

AudioBuffer buffer_from_array(const py::array_t<float, py::array::c_style>& samples) {
  require(samples.ndim() == 1, Error::Kind::BadArgument, "samples must be a 1-d float32 array");
  AudioBuffer buf;
  buf.sample_rate = kPipelineRate;
  buf.samples.assign(samples.data(), samples.data() + samples.size());
  return buf;
}

py::array_t<float> array_from_buffer(const AudioBuffer& buf) {
  py::array_t<float> out(static_cast<py::ssize_t>(buf.samples.size()));
  std::copy(buf.samples.begin(), buf.samples.end(), out.mutable_data());
  return out;
}

MaskPosterior posterior_from_list(const std::vector<double>& q) {
  MaskPosterior post;
  post.q = q;
  return post;
}

py::dict metrics_dict(const SalienceMetrics& m) {
  py::dict d;
  d["top1"] = m.top1;
  d["top2"] = m.top2;
  d["macro_f1"] = m.macro_f1;
  d["weighted_f1"] = m.weighted_f1;
  d["median_iou"] = m.median_iou;
  py::list rows;
  for (int i = 0; i < kNumEmotions; ++i) {
    py::list row;
    for (int j = 0; j < kNumEmotions; ++j)
      row.append(m.confusion.counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
    rows.append(row);
  }
  d["confusion"] = rows;
  return d;
}

py::list distribution_list(const EmotionDistribution& p) {
  py::list out;
  for (int i = 0; i < kNumEmotions; ++i) out.append(p[i]);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "prosody modification toolkit core";

  py::register_exception<Error>(m, "ProsodyError");

  m.attr("SAMPLE_RATE") = kPipelineRate;
  m.attr("EMOTIONS") = py::make_tuple("neutral", "angry", "happy", "sad", "fearful");

  m.def("read_wav", [](const std::string& path) { return array_from_buffer(read_wav(path)); },
        py::arg("path"), "Reads a 16 kHz mono PCM16 wav into a float32 array in [-1, 1].");

  m.def(
      "write_wav",
      [](const std::string& path, const py::array_t<float, py::array::c_style>& samples) {
        write_wav(path, buffer_from_array(samples));
      },
      py::arg("path"), py::arg("samples"), "Writes a float32 array as a 16 kHz mono PCM16 wav.");

  m.def(
      "time_stretch",
      [](const py::array_t<float, py::array::c_style>& samples, double factor) {
        const AudioBuffer y = buffer_from_array(samples);
        return array_from_buffer(time_stretch(y, TimeStretchMap::uniform(y.size(), factor),
                                              WsolaParams{}));
      },
      py::arg("samples"), py::arg("factor"),
      "Uniform time stretch by the given duration factor, pitch preserved.");

  m.def(
      "apply_edit",
      [](const py::array_t<float, py::array::c_style>& samples, int64_t begin, int64_t end,
         double duration_factor, double pitch_factor, double gain) {
        SegmentEdit edit;
        edit.begin = begin;
        edit.end = end;
        edit.duration_factor = static_cast<float>(duration_factor);
        edit.pitch_factor = static_cast<float>(pitch_factor);
        edit.gain = static_cast<float>(gain);
        return array_from_buffer(apply_edits(buffer_from_array(samples), {edit}, WsolaParams{}));
      },
      py::arg("samples"), py::arg("begin"), py::arg("end"), py::arg("duration_factor") = 1.0,
      py::arg("pitch_factor") = 1.0, py::arg("gain") = 1.0,
      "Stretches, pitch-shifts, and rescales one sample span in place.");

  m.def(
      "estimate_f0",
      [](const py::array_t<float, py::array::c_style>& samples, double fmin, double fmax) {
        return estimate_f0_autocorr(buffer_from_array(samples), fmin, fmax);
      },
      py::arg("samples"), py::arg("fmin") = 75.0, py::arg("fmax") = 500.0,
      "Autocorrelation fundamental-frequency estimate in Hz.");

  m.def(
      "prior_kl_chain",
      [](const std::vector<double>& q, double p_stay, double p_init) {
        MarkovPrior prior;
        prior.p_stay = p_stay;
        prior.p_init = p_init;
        return prior_kl_chain(posterior_from_list(q), prior);
      },
      py::arg("q"), py::arg("p_stay") = 0.93, py::arg("p_init") = 0.01,
      "KL between a factorized Bernoulli posterior and the Markov chain prior.");

  m.def(
      "prior_kl_bruteforce",
      [](const std::vector<double>& q, double p_stay, double p_init) {
        MarkovPrior prior;
        prior.p_stay = p_stay;
        prior.p_init = p_init;
        return prior_kl_bruteforce(posterior_from_list(q), prior);
      },
      py::arg("q"), py::arg("p_stay") = 0.93, py::arg("p_init") = 0.01,
      "Same KL by summing all 2^T mask sequences; oracle for small T.");

  m.def(
      "gen_corpus",
      [](const std::string& out_dir, int per_class, uint64_t seed) {
        SyntheticSpec spec;
        return gen_corpus(spec, per_class, out_dir, seed);
      },
      py::arg("out_dir"), py::arg("per_class") = 100, py::arg("seed") = 1234,
      "Synthesizes a labeled corpus; returns the manifest path.");

  m.def(
      "train_salience",
      [](const std::string& manifest, const std::string& out_model, int epochs, uint64_t seed,
         double lambda_prior, double lambda_sparse, double sparsity_target) {
        SalienceTrainConfig cfg;
        cfg.epochs = epochs;
        cfg.seed = seed;
        cfg.salience.lambda_prior = lambda_prior;
        cfg.salience.lambda_sparse = lambda_sparse;
        cfg.salience.sparsity_target = sparsity_target;
        cfg.validate();
        const SalienceModel model;
        const SalienceTrainResult result = train_salience(load_manifest(manifest), model, cfg);
        result.store.save(out_model);
        py::list log;
        for (const SalienceEpochLog& row : result.log) {
          py::dict d;
          d["epoch"] = row.epoch;
          d["temperature"] = row.temperature;
          d["mean_loss"] = row.mean_loss;
          d["mean_l1"] = row.mean_l1;
          d["mean_prior"] = row.mean_prior;
          d["mean_sparse"] = row.mean_sparse;
          log.append(d);
        }
        return log;
      },
      py::arg("manifest"), py::arg("out_model"), py::arg("epochs") = 30, py::arg("seed") = 1234,
      py::arg("lambda_prior") = SalienceConfig{}.lambda_prior,
      py::arg("lambda_sparse") = SalienceConfig{}.lambda_sparse,
      py::arg("sparsity_target") = SalienceConfig{}.sparsity_target,
      "Trains the saliency model on a corpus manifest; returns the epoch log.");

  m.def(
      "eval_salience",
      [](const std::string& manifest, const std::string& model_path, uint64_t seed) {
        ad::ParamStore store = ad::ParamStore::load(model_path);
        const SalienceModel model;
        const SalienceConfig cfg;
        return metrics_dict(eval_salience(store, model, load_manifest(manifest), cfg, seed));
      },
      py::arg("manifest"), py::arg("model"), py::arg("seed") = 1234,
      "Evaluates a trained saliency model; returns accuracy and IoU metrics.");

  m.def(
      "salience_predict",
      [](const py::array_t<float, py::array::c_style>& samples, const std::string& model_path,
         uint64_t seed) {
        ad::ParamStore store = ad::ParamStore::load(model_path);
        const SalienceModel model;
        const SalienceConfig cfg;
        const SalienceOutput out = salience_predict(store, model, buffer_from_array(samples), cfg,
                                                    MaskMode::Threshold, seed);
        py::dict d;
        d["prediction"] = distribution_list(out.prediction);
        d["posterior"] = out.posterior.q;
        d["hard_mask"] = out.hard_mask;
        py::list spans;
        for (const SampleSpan& s :
             extract_segments(out.hard_mask, SalienceModel::kFrameHop, SalienceModel::kFrameHop))
          spans.append(py::make_tuple(s.begin, s.end));
        d["segments"] = spans;
        return d;
      },
      py::arg("samples"), py::arg("model"), py::arg("seed") = 0,
      "Emotion distribution, frame posterior, and salient spans for one utterance.");

  m.def(
      "train_agent",
      [](const std::string& manifest, const std::string& salience_path,
         const std::string& out_model, int steps, uint64_t seed) {
        AgentTrainConfig cfg;
        cfg.steps = steps;
        cfg.seed = seed;
        cfg.validate();
        ad::ParamStore salience_store = ad::ParamStore::load(salience_path);
        const SalienceModel salience_model;
        const AgentModel agent_model;
        const AgentTrainResult result =
            train_agent(load_manifest(manifest), salience_store, salience_model, agent_model, cfg);
        result.store.save(out_model);
        py::dict d;
        d["steps"] = static_cast<int>(result.log.size());
        d["skipped"] = result.skipped;
        d["final_reward_avg"] = result.log.empty() ? 0.0 : result.log.back().reward_avg;
        return d;
      },
      py::arg("manifest"), py::arg("salience"), py::arg("out_model"), py::arg("steps") = 5000,
      py::arg("seed") = 4321, "Trains the conversion agent; returns a summary dict.");

  m.def(
      "convert",
      [](const py::array_t<float, py::array::c_style>& samples, const std::string& target,
         const std::string& agent_path, const std::string& salience_path, bool greedy,
         uint64_t seed) {
        const int cls = emotion_from_name(target);
        require(cls >= 0, Error::Kind::BadArgument, "unknown emotion name");
        ad::ParamStore agent_store = ad::ParamStore::load(agent_path);
        ad::ParamStore salience_store = ad::ParamStore::load(salience_path);
        const AgentModel agent_model;
        const SalienceModel salience_model;
        const AgentTrainConfig cfg;
        ConvertReport report;
        const AudioBuffer out =
            convert(buffer_from_array(samples), cls, agent_store, agent_model, salience_store,
                    salience_model, cfg, greedy ? ConvertPolicy::Greedy : ConvertPolicy::Sample,
                    seed, &report);
        py::dict d;
        d["samples"] = array_from_buffer(out);
        d["score_before"] = distribution_list(report.before);
        d["score_after"] = distribution_list(report.after);
        d["target_delta"] = report.reward;
        d["no_segments"] = report.no_segments;
        py::list segs;
        for (const SegmentEditReport& s : report.segments)
          segs.append(py::make_tuple(s.begin, s.end, s.duration_factor, s.pitch_factor, s.gain));
        d["segments"] = segs;
        return d;
      },
      py::arg("samples"), py::arg("target"), py::arg("agent"), py::arg("salience"),
      py::arg("greedy") = true, py::arg("seed") = 1234,
      "Applies the trained agent to push one utterance toward a target emotion.");

  m.def(
      "bandit_check",
      [](uint64_t seed) {
        const BanditReport r = reinforce_bandit_check(seed);
        py::dict d;
        d["estimator_within_2se"] = r.estimator_within_2se;
        d["variance_without_baseline"] = r.variance_without_baseline;
        d["variance_with_baseline"] = r.variance_with_baseline;
        d["steps_to_confident"] = r.steps_to_confident;
        d["final_policy"] = r.final_policy;
        return d;
      },
      py::arg("seed") = 2024,
      "Three-armed bandit: unbiasedness, baseline variance, convergence.");
}
