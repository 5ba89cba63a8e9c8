#include "config.hpp"

#include <json.hpp>

#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "capqe/error.hpp"
#include "capqe/hashing.hpp"

namespace capqe::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string join_path(const std::string& parent, std::string_view key) {
  return parent.empty() ? std::string(key) : parent + "." + std::string(key);
}

class Reader {
 public:
  explicit Reader(std::vector<std::string>& errors) : errors_(errors) {}

  // False (with an error) unless `j` is an object whose keys are all allowed.
  bool object(const json& j, const std::string& path, std::initializer_list<std::string_view> keys) {
    if (!j.is_object()) {
      fail(path.empty() ? "<root>" : path, "expected an object");
      return false;
    }
    for (const auto& [k, v] : j.items()) {
      bool known = false;
      for (auto allowed : keys) known = known || k == allowed;
      if (!known) fail(join_path(path, k), "unknown key");
    }
    return true;
  }

  void read(const json& obj, std::string_view key, const std::string& path, double& out) {
    if (const json* v = member(obj, key)) {
      if (v->is_number()) {
        out = v->get<double>();
      } else {
        fail(join_path(path, key), "expected a number");
      }
    }
  }

  template <typename Int>
    requires std::is_integral_v<Int>
  void read(const json& obj, std::string_view key, const std::string& path, Int& out) {
    if (const json* v = member(obj, key)) {
      if (!v->is_number_integer()) {
        fail(join_path(path, key), "expected an integer");
      } else if (std::is_unsigned_v<Int> && v->is_number_integer() && !v->is_number_unsigned()) {
        fail(join_path(path, key), "expected a non-negative integer");
      } else {
        out = v->get<Int>();
      }
    }
  }

  void read(const json& obj, std::string_view key, const std::string& path, std::string& out) {
    if (const json* v = member(obj, key)) {
      if (v->is_string()) {
        out = v->get<std::string>();
      } else {
        fail(join_path(path, key), "expected a string");
      }
    }
  }

  void read(const json& obj, std::string_view key, const std::string& path,
            std::map<std::string, std::string>& out) {
    if (const json* v = member(obj, key)) {
      bool ok = v->is_object();
      if (ok) {
        for (const auto& [k, x] : v->items()) ok = ok && x.is_string();
      }
      if (ok) {
        out = v->get<std::map<std::string, std::string>>();
      } else {
        fail(join_path(path, key), "expected an object of strings");
      }
    }
  }

  void fail(const std::string& path, const std::string& message) {
    errors_.push_back(path + ": " + message);
  }

 private:
  static const json* member(const json& obj, std::string_view key) {
    auto it = obj.find(std::string(key));
    return it == obj.end() ? nullptr : &*it;
  }

  std::vector<std::string>& errors_;
};

void read_components(Reader& r, const json& j, const std::string& path, ComponentValues& out) {
  if (!r.object(j, path, {"comet", "bert", "clip"})) return;
  r.read(j, "comet", path, out.comet);
  r.read(j, "bert", path, out.bert);
  r.read(j, "clip", path, out.clip);
}

void read_bounds(Reader& r, const json& j, const std::string& path, ComponentBounds& out) {
  if (!r.object(j, path, {"min", "max"})) return;
  r.read(j, "min", path, out.min);
  r.read(j, "max", path, out.max);
}

void read_qe(Reader& r, const json& j, const std::string& path, QEConfig& qe) {
  if (!r.object(j, path,
                {"weights", "threshold", "epsilon", "bounds", "component_thresholds"})) {
    return;
  }
  if (j.contains("weights")) read_components(r, j["weights"], path + ".weights", qe.weights);
  if (j.contains("component_thresholds")) {
    read_components(r, j["component_thresholds"], path + ".component_thresholds",
                    qe.component_thresholds);
  }
  r.read(j, "threshold", path, qe.threshold);
  r.read(j, "epsilon", path, qe.epsilon);
  if (j.contains("bounds")) {
    const json& b = j["bounds"];
    const std::string bp = path + ".bounds";
    if (r.object(b, bp, {"comet", "bert", "clip"})) {
      if (b.contains("comet")) read_bounds(r, b["comet"], bp + ".comet", qe.comet_bounds);
      if (b.contains("bert")) read_bounds(r, b["bert"], bp + ".bert", qe.bert_bounds);
      if (b.contains("clip")) read_bounds(r, b["clip"], bp + ".clip", qe.clip_bounds);
    }
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return {};
  fs::path path(p);
  return path.is_relative() && !base.empty() ? base / path : path;
}

void read_provider(Reader& r, const json& j, const std::string& path, const fs::path& base,
                   ProviderConfig& pc) {
  if (!r.object(j, path,
                {"backend", "endpoint", "timeout_ms", "max_retries", "max_in_flight", "seed",
                 "dim", "mean", "fixed_value", "rewrites", "substitutions", "embedding_file"})) {
    return;
  }
  std::string backend(to_string(pc.backend));
  r.read(j, "backend", path, backend);
  try {
    pc.backend = parse_backend(backend);
  } catch (const Error& e) {
    r.fail(path + ".backend", e.what());
  }
  r.read(j, "endpoint", path, pc.endpoint);
  std::int64_t timeout_ms = pc.timeout.count();
  r.read(j, "timeout_ms", path, timeout_ms);
  pc.timeout = std::chrono::milliseconds(timeout_ms);
  r.read(j, "max_retries", path, pc.max_retries);
  r.read(j, "max_in_flight", path, pc.max_in_flight);
  r.read(j, "seed", path, pc.seed);
  r.read(j, "dim", path, pc.dim);
  r.read(j, "mean", path, pc.mean);
  if (j.contains("fixed_value") && !j["fixed_value"].is_null()) {
    double v = 0.0;
    r.read(j, "fixed_value", path, v);
    pc.fixed_value = v;
  }
  r.read(j, "rewrites", path, pc.rewrites);
  r.read(j, "substitutions", path, pc.substitutions);
  std::string emb;
  r.read(j, "embedding_file", path, emb);
  if (!emb.empty()) {
    pc.embedding_file = resolve(base, emb).string();
    if (!fs::is_regular_file(pc.embedding_file)) {
      r.fail(path + ".embedding_file", "file not found: " + pc.embedding_file);
    }
  }
}

void check(std::vector<std::string>& errors, const std::string& path, auto&& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    errors.push_back(path + ": " + e.what());
  }
}

json provider_model_json(const ProviderConfig& pc) {
  json j{{"backend", std::string(to_string(pc.backend))},
         {"endpoint", pc.endpoint},
         {"seed", pc.seed},
         {"dim", pc.dim},
         {"mean", pc.mean},
         {"fixed_value", pc.fixed_value ? json(*pc.fixed_value) : json(nullptr)},
         {"embedding_file_sha256", nullptr}};
  if (!pc.embedding_file.empty()) {
    std::ifstream in(pc.embedding_file, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    j["embedding_file_sha256"] = sha256_hex(buf.str());
  }
  return j;
}

json components_json(const ComponentValues& v) {
  return json{{"comet", v.comet}, {"bert", v.bert}, {"clip", v.clip}};
}

json bounds_json(const ComponentBounds& b) { return json{{"min", b.min}, {"max", b.max}}; }

}  // namespace

PipelineConfig parse_config(std::string_view text, const fs::path& base_dir) {
  PipelineConfig cfg;
  json root = json::object();
  if (text.find_first_not_of(" \t\r\n") != std::string_view::npos) {
    try {
      root = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
  }

  std::vector<std::string> errors;
  Reader r(errors);
  if (r.object(root, "",
               {"corpus", "store", "chunk_size", "workers", "store_retries", "qe", "providers",
                "refinement", "sample"})) {
    std::string corpus, store;
    r.read(root, "corpus", "", corpus);
    r.read(root, "store", "", store);
    cfg.corpus = resolve(base_dir, corpus);
    cfg.store = resolve(base_dir, store);
    if (!cfg.corpus.empty() && !fs::is_regular_file(cfg.corpus)) {
      r.fail("corpus", "file not found: " + cfg.corpus.string());
    }
    r.read(root, "chunk_size", "", cfg.chunk_size);
    r.read(root, "workers", "", cfg.workers);
    r.read(root, "store_retries", "", cfg.store_retries);
    if (root.contains("qe")) read_qe(r, root["qe"], "qe", cfg.qe);

    if (root.contains("providers")) {
      const json& p = root["providers"];
      if (r.object(p, "providers",
                   {"translator", "text_embedder", "multimodal_embedder", "qe_scorer", "refiner"})) {
        const std::pair<const char*, ProviderConfig*> slots[] = {
            {"translator", &cfg.providers.translator},
            {"text_embedder", &cfg.providers.text_embedder},
            {"multimodal_embedder", &cfg.providers.multimodal_embedder},
            {"qe_scorer", &cfg.providers.qe_scorer},
            {"refiner", &cfg.providers.refiner}};
        for (const auto& [name, slot] : slots) {
          if (p.contains(name)) {
            read_provider(r, p[name], std::string("providers.") + name, base_dir, *slot);
          }
        }
      }
    }

    if (root.contains("refinement")) {
      const json& j = root["refinement"];
      if (r.object(j, "refinement", {"max_iterations", "accept_rule", "instructions"})) {
        r.read(j, "max_iterations", "refinement", cfg.refinement.max_iterations);
        std::string rule(to_string(cfg.refinement.accept_rule));
        r.read(j, "accept_rule", "refinement", rule);
        try {
          cfg.refinement.accept_rule = parse_accept_rule(rule);
        } catch (const Error& e) {
          r.fail("refinement.accept_rule", e.what());
        }
        r.read(j, "instructions", "refinement", cfg.refinement.instructions);
      }
    }

    if (root.contains("sample")) {
      const json& j = root["sample"];
      if (r.object(j, "sample", {"fraction", "seed"})) {
        r.read(j, "fraction", "sample", cfg.sample.fraction);
        r.read(j, "seed", "sample", cfg.sample.seed);
      }
    }
  }

  if (cfg.chunk_size < 1) r.fail("chunk_size", "must be >= 1");
  if (cfg.workers < 1) r.fail("workers", "must be >= 1");
  if (cfg.store_retries < 0) r.fail("store_retries", "must be >= 0");
  if (!(cfg.sample.fraction > 0.0 && cfg.sample.fraction < 1.0)) {
    r.fail("sample.fraction", "must lie in (0, 1)");
  }
  check(errors, "qe", [&] { cfg.qe.validate(); });
  check(errors, "providers.translator", [&] { cfg.providers.translator.validate(); });
  check(errors, "providers.text_embedder", [&] { cfg.providers.text_embedder.validate(); });
  check(errors, "providers.multimodal_embedder",
        [&] { cfg.providers.multimodal_embedder.validate(); });
  check(errors, "providers.qe_scorer", [&] { cfg.providers.qe_scorer.validate(); });
  check(errors, "providers.refiner", [&] { cfg.providers.refiner.validate(); });
  check(errors, "refinement", [&] { cfg.refinement.validate(); });

  if (!errors.empty()) {
    std::string msg = "invalid config:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw ConfigError(msg);
  }
  cfg.config_hash = sha256_hex(canonical_processing_json(cfg));
  return cfg;
}

PipelineConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path());
}

std::string canonical_processing_json(const PipelineConfig& c) {
  const json j{
      {"qe",
       {{"weights", components_json(c.qe.weights)},
        {"threshold", c.qe.threshold},
        {"epsilon", c.qe.epsilon},
        {"bounds",
         {{"comet", bounds_json(c.qe.comet_bounds)},
          {"bert", bounds_json(c.qe.bert_bounds)},
          {"clip", bounds_json(c.qe.clip_bounds)}}}}},
      {"providers",
       {{"translator", provider_model_json(c.providers.translator)},
        {"text_embedder", provider_model_json(c.providers.text_embedder)},
        {"multimodal_embedder", provider_model_json(c.providers.multimodal_embedder)},
        {"qe_scorer", provider_model_json(c.providers.qe_scorer)}}}};
  return j.dump();
}

}  // namespace capqe::cli
