#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <json.hpp>

#include "neuronalg/pipeline.hpp"

namespace nalg {

namespace {

using nlohmann::json;

const std::map<std::string, ChannelPolicy>& policy_names() {
  static const std::map<std::string, ChannelPolicy> names{
      {"luminance", ChannelPolicy::Luminance}, {"red", ChannelPolicy::Red},
      {"green", ChannelPolicy::Green},         {"blue", ChannelPolicy::Blue},
      {"already_gray", ChannelPolicy::AlreadyGray},
  };
  return names;
}

std::string policy_name(ChannelPolicy p) {
  for (const auto& [name, value] : policy_names()) {
    if (value == p) return name;
  }
  return "luminance";
}

using Setter = std::function<void(const json&)>;

// Applies each key of `obj` through `setters`; unknown keys are errors so
// typos do not silently fall back to defaults.
void apply(const json& obj, const std::map<std::string, Setter>& setters, const std::string& where) {
  if (!obj.is_object()) fail(ErrorCode::ConfigError, where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    auto it = setters.find(key);
    if (it == setters.end()) fail(ErrorCode::ConfigError, "unknown key " + where + "." + key);
    try {
      it->second(value);
    } catch (const json::exception& e) {
      fail(ErrorCode::ConfigError, "bad value for " + where + "." + key + ": " + e.what());
    }
  }
}

template <class T>
Setter set(T& field) {
  return [&field](const json& v) { field = v.get<T>(); };
}

void read_neuron(const json& j, NeuronParams& n) {
  apply(j,
        {{"tau_m", set(n.tau_m)},
         {"c_m", set(n.c_m)},
         {"v_rest", set(n.v_rest)},
         {"v_th", set(n.v_th)},
         {"v_reset", set(n.v_reset)},
         {"t_ref", set(n.t_ref)}},
        "agent.neuron");
}

void read_synapse(const json& j, SynapseParams& s) {
  apply(j,
        {{"w_exc", set(s.w_exc)},
         {"w_inh", set(s.w_inh)},
         {"tau_syn", set(s.tau_syn)},
         {"delay", set(s.delay)}},
        "agent.synapse");
}

void read_agent(const json& j, AgentConfig& a) {
  apply(j,
        {{"neuron", [&](const json& v) { read_neuron(v, a.neuron); }},
         {"synapse", [&](const json& v) { read_synapse(v, a.synapse); }},
         {"dt", set(a.dt)},
         {"window", set(a.window)},
         {"speed_gain", set(a.speed_gain)},
         {"offset", set(a.offset)},
         {"intensity", set(a.intensity)},
         {"s_factor", set(a.s_factor)},
         {"lambda_init", set(a.lambda_init)},
         {"lambda_max", set(a.lambda_max)},
         {"max_windows", set(a.max_windows)},
         {"zero_streak", set(a.zero_streak)},
         {"band_width", set(a.band_width)},
         {"band_windows", set(a.band_windows)},
         {"mask_sigma_sd", set(a.mask_sigma_sd)}},
        "agent");
}

void read_split_merge(const json& j, SplitMergeConfig& s) {
  apply(j,
        {{"split_factor", set(s.split_factor)},
         {"merge_factor", set(s.merge_factor)},
         {"max_recursion_depth", set(s.max_recursion_depth)},
         {"marker_suppression_ratio", set(s.markers.suppression_ratio)},
         {"marker_h", set(s.markers.h)}},
        "split_merge");
}

void require(bool ok, const std::string& what) {
  if (!ok) fail(ErrorCode::ConfigError, what);
}

}  // namespace

void PipelineConfig::validate() const {
  for (double s : smoothing_sigmas_sf) require(std::isfinite(s) && s >= 0.0, "smoothing sigmas must be >= 0");
  require(split_merge.split_factor > 1.0, "split_factor must exceed 1");
  require(split_merge.merge_factor > 0.0 && split_merge.merge_factor < 1.0,
          "merge_factor must lie in (0, 1)");
  require(split_merge.max_recursion_depth >= 1, "max_recursion_depth must be >= 1");
  require(split_merge.markers.suppression_ratio >= 0.0 && split_merge.markers.suppression_ratio < 1.0,
          "marker_suppression_ratio must lie in [0, 1)");
  require(split_merge.markers.h >= 0.0, "marker_h must be >= 0");
  const AgentConfig& a = agent;
  require(a.neuron.tau_m > 0.0 && a.neuron.c_m > 0.0 && a.neuron.t_ref >= 0.0,
          "neuron tau_m, c_m must be > 0 and t_ref >= 0");
  require(a.neuron.v_th > a.neuron.v_reset, "v_th must exceed v_reset");
  require(a.synapse.tau_syn > 0.0 && a.synapse.delay >= 0.0, "synapse tau_syn > 0, delay >= 0");
  require(a.dt > 0.0 && a.window >= a.dt, "dt must be > 0 and window >= dt");
  require(a.lambda_max > 0.0 && a.lambda_init >= 0.0 && a.lambda_init <= a.lambda_max,
          "lambda_init must lie in [0, lambda_max]");
  require(a.offset >= 0.0 && a.max_windows >= 1 && a.zero_streak >= 1 && a.band_windows >= 1 &&
              a.band_width >= 0.0,
          "agent convergence settings out of range");
  require(a.intensity >= 0.0 && a.s_factor >= 0.0 && a.mask_sigma_sd >= 0.0,
          "intensity, s_factor and mask_sigma_sd must be >= 0");
  require(jobs >= 0, "jobs must be >= 0");
}

PipelineConfig config_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::ConfigError, std::string("malformed JSON: ") + e.what());
  }
  PipelineConfig cfg;
  apply(doc,
        {{"channel_policy",
          [&](const json& v) {
            auto it = policy_names().find(v.get<std::string>());
            if (it == policy_names().end()) {
              fail(ErrorCode::ConfigError, "unknown channel_policy " + v.dump());
            }
            cfg.channel_policy = it->second;
          }},
         {"smoothing_sigmas_sf", set(cfg.smoothing_sigmas_sf)},
         {"split_merge", [&](const json& v) { read_split_merge(v, cfg.split_merge); }},
         {"agent", [&](const json& v) { read_agent(v, cfg.agent); }},
         {"seed", set(cfg.seed)},
         {"jobs", set(cfg.jobs)},
         {"keep_snapshots", set(cfg.keep_snapshots)}},
        "config");
  cfg.validate();
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

std::string config_to_json(const PipelineConfig& cfg) {
  const AgentConfig& a = cfg.agent;
  json j = {
      {"channel_policy", policy_name(cfg.channel_policy)},
      {"smoothing_sigmas_sf", cfg.smoothing_sigmas_sf},
      {"split_merge",
       {{"split_factor", cfg.split_merge.split_factor},
        {"merge_factor", cfg.split_merge.merge_factor},
        {"max_recursion_depth", cfg.split_merge.max_recursion_depth},
        {"marker_suppression_ratio", cfg.split_merge.markers.suppression_ratio},
        {"marker_h", cfg.split_merge.markers.h}}},
      {"agent",
       {{"neuron",
         {{"tau_m", a.neuron.tau_m},
          {"c_m", a.neuron.c_m},
          {"v_rest", a.neuron.v_rest},
          {"v_th", a.neuron.v_th},
          {"v_reset", a.neuron.v_reset},
          {"t_ref", a.neuron.t_ref}}},
        {"synapse",
         {{"w_exc", a.synapse.w_exc},
          {"w_inh", a.synapse.w_inh},
          {"tau_syn", a.synapse.tau_syn},
          {"delay", a.synapse.delay}}},
        {"dt", a.dt},
        {"window", a.window},
        {"speed_gain", a.speed_gain},
        {"offset", a.offset},
        {"intensity", a.intensity},
        {"s_factor", a.s_factor},
        {"lambda_init", a.lambda_init},
        {"lambda_max", a.lambda_max},
        {"max_windows", a.max_windows},
        {"zero_streak", a.zero_streak},
        {"band_width", a.band_width},
        {"band_windows", a.band_windows},
        {"mask_sigma_sd", a.mask_sigma_sd}}},
      {"seed", cfg.seed},
      {"jobs", cfg.jobs},
      {"keep_snapshots", cfg.keep_snapshots},
  };
  return j.dump(2);
}

}  // namespace nalg
