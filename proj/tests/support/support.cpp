#include "support.hpp"

#include <httplib.h>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "capqe/error.hpp"
#include "capqe/hashing.hpp"
#include "capqe/mock_providers.hpp"
#include "capqe/sampler.hpp"

namespace capqe::test {

namespace fs = std::filesystem;
using json = nlohmann::json;

fs::path fixture(const std::string& name) { return fs::path(CAPQE_FIXTURES_DIR) / name; }

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
}

TempDir::TempDir() {
  std::string tmpl = (fs::temp_directory_path() / "capqe-test-XXXXXX").string();
  if (mkdtemp(tmpl.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::map<std::string, std::string> tree_bytes(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = read_file(e.path());
  }
  return out;
}

ProviderSet mock_providers(std::uint64_t seed) {
  ProvidersConfig cfg;
  for (auto* pc : {&cfg.translator, &cfg.text_embedder, &cfg.multimodal_embedder, &cfg.qe_scorer,
                   &cfg.refiner}) {
    pc->seed = seed;
  }
  return make_providers(cfg);
}

Corpus corpus_from_labels(const std::vector<std::set<std::string>>& labels) {
  std::vector<ImageEntry> images;
  std::vector<CaptionRecord> captions;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto id = static_cast<ImageId>(i + 1);
    images.push_back({id, "img/" + std::to_string(id), LabelSet{labels[i]}, {id * 100}});
    CaptionRecord c;
    c.caption_id = id * 100;
    c.image_id = id;
    c.source_text = "caption of image " + std::to_string(id);
    captions.push_back(c);
  }
  return Corpus(std::move(images), std::move(captions));
}

Corpus synthetic_corpus(int n_images, int captions_per_image, std::uint64_t seed) {
  static const std::vector<std::string> nouns = {"dog", "cat", "man", "woman", "bus", "train",
                                                 "horse", "kite", "boat", "pizza", "bench", "bird"};
  static const std::vector<std::string> verbs = {"runs", "sits", "waits", "stands", "sleeps", "plays"};
  static const std::vector<std::string> places = {"park", "street", "beach", "kitchen", "field",
                                                  "station"};
  std::uint64_t state = seed;
  auto pick = [&](const std::vector<std::string>& v) { return v[splitmix64(state) % v.size()]; };
  std::vector<ImageEntry> images;
  std::vector<CaptionRecord> captions;
  for (int i = 0; i < n_images; ++i) {
    const ImageId id = i + 1;
    const std::string noun = pick(nouns), place = pick(places);
    ImageEntry img{id, "a " + noun + " in the " + place, LabelSet{{noun}}, {}};
    for (int j = 0; j < captions_per_image; ++j) {
      CaptionRecord c;
      c.caption_id = id * 10 + j;
      c.image_id = id;
      const bool on_topic = splitmix64(state) % 4 != 0;
      c.source_text = "A " + (on_topic ? noun : pick(nouns)) + " " + pick(verbs) + " in the " +
                      (on_topic ? place : pick(places)) + ".";
      img.caption_ids.push_back(c.caption_id);
      captions.push_back(std::move(c));
    }
    images.push_back(std::move(img));
  }
  return Corpus(std::move(images), std::move(captions));
}

std::vector<std::set<std::string>> random_labels(int n_images, int n_labels, int max_per_image,
                                                 std::uint64_t seed) {
  std::uint64_t state = seed;
  auto uniform = [&] { return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53; };
  double total = 0.0;
  for (int l = 1; l <= n_labels; ++l) total += 1.0 / l;
  std::vector<std::set<std::string>> out(n_images);
  for (auto& labels : out) {
    const int n = static_cast<int>(splitmix64(state) % static_cast<std::uint64_t>(max_per_image + 1));
    for (int j = 0; j < n; ++j) {
      double u = uniform() * total;
      int l = 1;
      while (l < n_labels && (u -= 1.0 / l) > 0) ++l;
      labels.insert("L" + std::to_string(l));
    }
  }
  return out;
}

double random_subset_tvd(const Corpus& corpus, std::size_t k, int trials, std::uint64_t seed) {
  std::vector<ImageId> ids;
  for (const auto& img : corpus.images()) ids.push_back(img.image_id);
  std::uint64_t state = seed;
  double sum = 0.0;
  for (int t = 0; t < trials; ++t) {
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + splitmix64(state) % (ids.size() - i);
      std::swap(ids[i], ids[j]);
    }
    sum += distribution_report(corpus, std::set<ImageId>(ids.begin(), ids.begin() + k))
               .total_variation_distance;
  }
  return sum / trials;
}

std::multiset<std::string> CallLog::forward_set() {
  std::lock_guard lock(mu);
  return {forward_texts.begin(), forward_texts.end()};
}

namespace {

class CountingTranslator final : public Translator {
 public:
  CountingTranslator(std::shared_ptr<Translator> b, std::shared_ptr<CallLog> l)
      : base(std::move(b)), log(std::move(l)) {}
  std::vector<std::string> translate(std::span<const std::string> texts,
                                     Direction direction) override {
    ++log->translate_calls;
    if (direction == Direction::SourceToTarget) {
      std::lock_guard lock(log->mu);
      log->forward_texts.insert(log->forward_texts.end(), texts.begin(), texts.end());
    }
    return base->translate(texts, direction);
  }
  std::shared_ptr<Translator> base;
  std::shared_ptr<CallLog> log;
};

class CountingEmbedder final : public TextEmbedder {
 public:
  CountingEmbedder(std::shared_ptr<TextEmbedder> b, std::shared_ptr<CallLog> l)
      : base(std::move(b)), log(std::move(l)) {}
  std::vector<TokenEmbeddingSequence> embed_text_tokens(std::span<const std::string> t) override {
    ++log->embed_calls;
    return base->embed_text_tokens(t);
  }
  std::shared_ptr<TextEmbedder> base;
  std::shared_ptr<CallLog> log;
};

class CountingMultimodal final : public MultimodalEmbedder {
 public:
  CountingMultimodal(std::shared_ptr<MultimodalEmbedder> b, std::shared_ptr<CallLog> l)
      : base(std::move(b)), log(std::move(l)) {}
  MultimodalEmbedding embed_multimodal(std::span<const std::string> refs,
                                       std::span<const std::string> texts) override {
    ++log->multimodal_calls;
    return base->embed_multimodal(refs, texts);
  }
  std::shared_ptr<MultimodalEmbedder> base;
  std::shared_ptr<CallLog> log;
};

class CountingQe final : public QeScorer {
 public:
  CountingQe(std::shared_ptr<QeScorer> b, std::shared_ptr<CallLog> l)
      : base(std::move(b)), log(std::move(l)) {}
  std::vector<double> qe_score(std::span<const std::string> s,
                               std::span<const std::string> t) override {
    ++log->qe_calls;
    return base->qe_score(s, t);
  }
  std::shared_ptr<QeScorer> base;
  std::shared_ptr<CallLog> log;
};

class CountingRefiner final : public Refiner {
 public:
  CountingRefiner(std::shared_ptr<Refiner> b, std::shared_ptr<CallLog> l)
      : base(std::move(b)), log(std::move(l)) {}
  std::vector<std::string> refine(std::span<const std::string> texts,
                                  std::string_view instructions) override {
    ++log->refine_calls;
    {
      std::lock_guard lock(log->mu);
      log->refined_texts.insert(log->refined_texts.end(), texts.begin(), texts.end());
    }
    return base->refine(texts, instructions);
  }
  std::shared_ptr<Refiner> base;
  std::shared_ptr<CallLog> log;
};

}  // namespace

ProviderSet counting(const ProviderSet& base, std::shared_ptr<CallLog> log) {
  ProviderSet out;
  out.translator = std::make_shared<CountingTranslator>(base.translator, log);
  out.text_embedder = std::make_shared<CountingEmbedder>(base.text_embedder, log);
  out.multimodal_embedder = std::make_shared<CountingMultimodal>(base.multimodal_embedder, log);
  out.qe_scorer = std::make_shared<CountingQe>(base.qe_scorer, log);
  if (base.refiner) out.refiner = std::make_shared<CountingRefiner>(base.refiner, log);
  return out;
}

std::vector<std::string> TableTranslator::translate(std::span<const std::string> texts,
                                                    Direction direction) {
  std::vector<std::string> out;
  for (const auto& t : texts) {
    if (direction == Direction::TargetToSource) {
      out.push_back(MockTranslator::backward(t));
    } else if (auto it = table_.find(t); it != table_.end()) {
      out.push_back(it->second);
    } else {
      out.push_back(MockTranslator::forward(t));
    }
  }
  return out;
}

std::vector<std::string> PoisonedTranslator::translate(std::span<const std::string> texts,
                                                       Direction direction) {
  for (const auto& t : texts) {
    if (t.find(marker_) != std::string::npos) throw ProviderError("poisoned input: " + t);
  }
  MockTranslator mock;
  return mock.translate(texts, direction);
}

std::vector<std::string> TableRefiner::refine(std::span<const std::string> texts,
                                              std::string_view) {
  std::vector<std::string> out;
  for (const auto& t : texts) {
    auto it = table_.find(t);
    out.push_back(it == table_.end() ? t : it->second);
  }
  return out;
}

std::vector<std::string> FailingRefiner::refine(std::span<const std::string>, std::string_view) {
  throw ProviderError("refiner unavailable");
}

struct StubModelServer::Impl {
  httplib::Server server;
  std::thread thread;
  int port{0};
  std::mutex mu;
  int fail_remaining{0};
  int fail_status{500};
  std::string body_override;
  MockTranslator translator;
  MockTextEmbedder embedder{16, 0};
  MockMultimodalEmbedder multimodal{16, 0};
  MockQeScorer qe{0.76, std::nullopt, 0};
};

namespace {

json vec_json(const EmbeddingVector& v) { return v.values; }

}  // namespace

StubModelServer::StubModelServer() : impl_(std::make_unique<Impl>()) {
  auto handler = [this](auto fn) {
    return [this, fn](const httplib::Request& req, httplib::Response& res) {
      ++requests_;
      const int now = ++in_flight_;
      int prev = max_concurrent_.load();
      while (now > prev && !max_concurrent_.compare_exchange_weak(prev, now)) {
      }
      if (delay_ms_ > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms_.load()));
      {
        std::lock_guard lock(impl_->mu);
        if (impl_->fail_remaining > 0) {
          --impl_->fail_remaining;
          res.status = impl_->fail_status;
          res.set_content("{\"error\":\"injected\"}", "application/json");
          --in_flight_;
          return;
        }
        if (!impl_->body_override.empty()) {
          res.set_content(impl_->body_override, "application/json");
          --in_flight_;
          return;
        }
      }
      const json body = json::parse(req.body);
      res.set_content(fn(body).dump(), "application/json");
      --in_flight_;
    };
  };
  auto& s = impl_->server;
  s.Post("/translate", handler([this](const json& b) {
           const auto texts = b.at("texts").get<std::vector<std::string>>();
           const auto dir = b.at("direction").get<std::string>() == "src2tgt"
                                ? Direction::SourceToTarget
                                : Direction::TargetToSource;
           return json{{"outputs", impl_->translator.translate(texts, dir)}};
         }));
  s.Post("/embed_tokens", handler([this](const json& b) {
           const auto texts = b.at("texts").get<std::vector<std::string>>();
           json outputs = json::array();
           for (const auto& seq : impl_->embedder.embed_text_tokens(texts)) {
             json s = json::array();
             for (const auto& v : seq) s.push_back(vec_json(v));
             outputs.push_back(s);
           }
           return json{{"outputs", outputs}, {"model_tag", "stub"}};
         }));
  s.Post("/embed_multimodal", handler([this](const json& b) {
           const auto refs = b.at("image_refs").get<std::vector<std::string>>();
           const auto texts = b.at("texts").get<std::vector<std::string>>();
           const auto mm = impl_->multimodal.embed_multimodal(refs, texts);
           json iv = json::array(), tv = json::array();
           for (const auto& v : mm.image_vectors) iv.push_back(vec_json(v));
           for (const auto& v : mm.text_vectors) tv.push_back(vec_json(v));
           return json{{"image_vectors", iv}, {"text_vectors", tv}, {"model_tag", "stub"}};
         }));
  s.Post("/qe_score", handler([this](const json& b) {
           std::vector<std::string> src, tgt;
           for (const auto& p : b.at("pairs")) {
             src.push_back(p.at("src").get<std::string>());
             tgt.push_back(p.at("tgt").get<std::string>());
           }
           return json{{"outputs", impl_->qe.qe_score(src, tgt)}};
         }));
  s.Post("/refine", handler([](const json& b) {
           return json{{"outputs", b.at("texts")}};
         }));
  impl_->port = s.bind_to_any_port("127.0.0.1");
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

StubModelServer::~StubModelServer() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

std::string StubModelServer::endpoint() const {
  return "http://127.0.0.1:" + std::to_string(impl_->port);
}

void StubModelServer::fail_next(int n, int status) {
  std::lock_guard lock(impl_->mu);
  impl_->fail_remaining = n;
  impl_->fail_status = status;
}

void StubModelServer::override_body(std::string body) {
  std::lock_guard lock(impl_->mu);
  impl_->body_override = std::move(body);
}

}  // namespace capqe::test
