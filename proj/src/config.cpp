// Copyright 2026 The Emorig Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "emorig/config.h"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

extern char** environ;

namespace emorig::config {

namespace {

using Json = nlohmann::json;

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return j.at(key).get<T>();
}

std::vector<int> get_set(const Json& j, const char* key,
                         const std::vector<int>& fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return j.at(key).get<std::vector<int>>();
}

Stage1Schedule parse_stage1(const Json& j) {
  Stage1Schedule s;
  s.learning_rate = get_or(j, "learning_rate", s.learning_rate);
  s.decay = get_or(j, "decay", s.decay);
  s.step_size = get_or(j, "step_size", s.step_size);
  s.weight_decay = get_or(j, "weight_decay", s.weight_decay);
  s.epochs_self = get_or(j, "epochs_self", s.epochs_self);
  s.epochs_overlap = get_or(j, "epochs_overlap", s.epochs_overlap);
  s.epochs_cycle = get_or(j, "epochs_cycle", s.epochs_cycle);
  s.batch_size = get_or(j, "batch_size", s.batch_size);
  return s;
}

StageSchedule parse_stage(const Json& j, const StageSchedule& defaults) {
  StageSchedule s = defaults;
  s.learning_rate = get_or(j, "learning_rate", s.learning_rate);
  s.decay = get_or(j, "decay", s.decay);
  s.step_size = get_or(j, "step_size", s.step_size);
  s.weight_decay = get_or(j, "weight_decay", s.weight_decay);
  s.epochs = get_or(j, "epochs", s.epochs);
  s.batch_size = get_or(j, "batch_size", s.batch_size);
  return s;
}

// Parses an environment value as JSON when possible (numbers, bools),
// otherwise as a string.
Json parse_env_value(const std::string& text) {
  Json v = Json::parse(text, nullptr, false);
  if (v.is_discarded()) return Json(text);
  return v;
}

void apply_env_overrides(Json& j) {
  constexpr const char* kPrefix = "EMORIG_";
  for (char** env = environ; *env != nullptr; ++env) {
    std::string entry(*env);
    auto eq = entry.find('=');
    if (eq == std::string::npos) continue;
    std::string name = entry.substr(0, eq);
    if (name.rfind(kPrefix, 0) != 0) continue;
    std::string path = name.substr(std::string(kPrefix).size());
    std::string value = entry.substr(eq + 1);

    Json* cursor = &j;
    std::size_t pos = 0;
    while (true) {
      auto sep = path.find("__", pos);
      std::string key = path.substr(pos, sep == std::string::npos
                                              ? std::string::npos
                                              : sep - pos);
      if (sep == std::string::npos) {
        (*cursor)[key] = parse_env_value(value);
        break;
      }
      cursor = &(*cursor)[key];
      pos = sep + 2;
    }
  }
}

RunConfig from_json(const Json& j) {
  RunConfig cfg;
  cfg.seed = get_or<std::uint64_t>(j, "seed", cfg.seed);

  const Json sj = j.contains("synth") ? j.at("synth") : Json::object();
  cfg.synth.n_contents = get_or(sj, "n_contents", cfg.synth.n_contents);
  cfg.synth.seq_len = get_or(sj, "seq_len", cfg.synth.seq_len);
  cfg.synth.dims = get_or(sj, "dims", cfg.synth.dims);
  cfg.synth.fps = get_or(sj, "fps", cfg.synth.fps);
  cfg.synth.seed = get_or<std::uint64_t>(sj, "seed", cfg.seed);
  cfg.synth.content_dim = get_or(sj, "content_dim", cfg.synth.content_dim);
  cfg.synth.emotion_gain = get_or(sj, "emotion_gain", cfg.synth.emotion_gain);
  cfg.synth.leak = get_or(sj, "leak", cfg.synth.leak);
  cfg.synth.audio_width = get_or(sj, "audio_width", cfg.synth.audio_width);
  cfg.synth.text_width = get_or(sj, "text_width", cfg.synth.text_width);
  cfg.synth.guidance_text_width =
      get_or(sj, "guidance_text_width", cfg.synth.guidance_text_width);
  cfg.synth.guidance_image_width =
      get_or(sj, "guidance_image_width", cfg.synth.guidance_image_width);
  cfg.synth.feature_noise = get_or(sj, "feature_noise", cfg.synth.feature_noise);
  cfg.synth.guidance_noise =
      get_or(sj, "guidance_noise", cfg.synth.guidance_noise);

  auto defaults = rig::ControllerSets::defaults(cfg.synth.dims);
  const Json cs = j.contains("controller_sets") ? j.at("controller_sets")
                                                : Json::object();
  cfg.synth.sets.lip = get_set(cs, "lip", defaults.lip);
  cfg.synth.sets.emo = get_set(cs, "emo", defaults.emo);
  cfg.synth.sets.up = get_set(cs, "up", defaults.up);
  cfg.synth.sets.intensity = get_set(cs, "int", defaults.intensity);

  const Json mj = j.contains("model") ? j.at("model") : Json::object();
  cfg.model.latent_content = get_or(mj, "latent_content", cfg.model.latent_content);
  cfg.model.latent_emotion = get_or(mj, "latent_emotion", cfg.model.latent_emotion);
  cfg.model.hidden = get_or(mj, "hidden", cfg.model.hidden);
  cfg.model.acm_width = get_or(mj, "acm_width", cfg.model.acm_width);
  cfg.model.cmf_dim = get_or(mj, "cmf_dim", cfg.model.cmf_dim);
  cfg.model.pe_dim = get_or(mj, "pe_dim", cfg.model.pe_dim);
  cfg.model.label_dim = get_or(mj, "label_dim", cfg.model.label_dim);
  cfg.model.fusion_hidden = get_or(mj, "fusion_hidden", cfg.model.fusion_hidden);
  cfg.model.head_hidden = get_or(mj, "head_hidden", cfg.model.head_hidden);

  const Json tj = j.contains("train") ? j.at("train") : Json::object();
  cfg.stage1 = parse_stage1(tj.contains("stage1") ? tj.at("stage1") : Json::object());
  StageSchedule base;
  cfg.stage2 = parse_stage(tj.contains("stage2") ? tj.at("stage2") : Json::object(), base);
  cfg.stage3 = parse_stage(tj.contains("stage3") ? tj.at("stage3") : Json::object(), base);
  cfg.stage4 = parse_stage(tj.contains("stage4") ? tj.at("stage4") : Json::object(), base);
  cfg.lambda_sim = get_or(tj, "lambda_sim", cfg.lambda_sim);
  cfg.lambda_int = get_or(tj, "lambda_int", cfg.lambda_int);
  cfg.lambda_int_direct = get_or(tj, "lambda_int_direct", cfg.lambda_int_direct);
  cfg.holdout_contents = get_or(tj, "holdout_contents", cfg.holdout_contents);

  cfg.ablation = get_or<std::string>(j, "ablation", cfg.ablation);
  return cfg;
}

Json stage1_json(const Stage1Schedule& s) {
  return Json{{"learning_rate", s.learning_rate}, {"decay", s.decay},
              {"step_size", s.step_size},         {"weight_decay", s.weight_decay},
              {"epochs_self", s.epochs_self},
              {"epochs_overlap", s.epochs_overlap}, {"epochs_cycle", s.epochs_cycle},
              {"batch_size", s.batch_size}};
}

Json stage_json(const StageSchedule& s) {
  return Json{{"learning_rate", s.learning_rate},
              {"decay", s.decay},
              {"step_size", s.step_size},
              {"weight_decay", s.weight_decay},
              {"epochs", s.epochs},
              {"batch_size", s.batch_size}};
}

}  // namespace

void RunConfig::validate() const {
  synth.validate();
  if (holdout_contents < 0 || holdout_contents >= synth.n_contents)
    throw ValidationError("holdout_contents must be in [0, n_contents)");
  if (lambda_sim < 0 || lambda_int < 0 || lambda_int_direct < 0)
    throw ValidationError("loss weights must be nonnegative");
  if (model.latent_content < 1 || model.latent_emotion < 1)
    throw ValidationError("latent widths must be positive");
}

RunConfig parse_config(const std::string& json_text, bool apply_env) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const Json::exception& e) {
    throw IoError("malformed config: " + std::string(e.what()));
  }
  if (apply_env) apply_env_overrides(j);
  RunConfig cfg = from_json(j);
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

RunConfig default_config() {
  Json empty = Json::object();
  apply_env_overrides(empty);
  RunConfig cfg = from_json(empty);
  cfg.validate();
  return cfg;
}

std::string to_json(const RunConfig& cfg) {
  Json j;
  j["seed"] = cfg.seed;
  j["synth"] = Json{{"n_contents", cfg.synth.n_contents},
                    {"seq_len", cfg.synth.seq_len},
                    {"dims", cfg.synth.dims},
                    {"fps", cfg.synth.fps},
                    {"seed", cfg.synth.seed},
                    {"content_dim", cfg.synth.content_dim},
                    {"emotion_gain", cfg.synth.emotion_gain},
                    {"leak", cfg.synth.leak},
                    {"audio_width", cfg.synth.audio_width},
                    {"text_width", cfg.synth.text_width},
                    {"guidance_text_width", cfg.synth.guidance_text_width},
                    {"guidance_image_width", cfg.synth.guidance_image_width},
                    {"feature_noise", cfg.synth.feature_noise},
                    {"guidance_noise", cfg.synth.guidance_noise}};
  j["controller_sets"] = Json{{"lip", cfg.synth.sets.lip},
                              {"emo", cfg.synth.sets.emo},
                              {"up", cfg.synth.sets.up},
                              {"int", cfg.synth.sets.intensity}};
  j["model"] = Json{{"latent_content", cfg.model.latent_content},
                    {"latent_emotion", cfg.model.latent_emotion},
                    {"hidden", cfg.model.hidden},
                    {"acm_width", cfg.model.acm_width},
                    {"cmf_dim", cfg.model.cmf_dim},
                    {"pe_dim", cfg.model.pe_dim},
                    {"label_dim", cfg.model.label_dim},
                    {"fusion_hidden", cfg.model.fusion_hidden},
                    {"head_hidden", cfg.model.head_hidden}};
  j["train"] = Json{{"stage1", stage1_json(cfg.stage1)},
                    {"stage2", stage_json(cfg.stage2)},
                    {"stage3", stage_json(cfg.stage3)},
                    {"stage4", stage_json(cfg.stage4)},
                    {"lambda_sim", cfg.lambda_sim},
                    {"lambda_int", cfg.lambda_int},
                    {"lambda_int_direct", cfg.lambda_int_direct},
                    {"holdout_contents", cfg.holdout_contents}};
  j["ablation"] = cfg.ablation;
  return j.dump(2);
}

}  // namespace emorig::config
