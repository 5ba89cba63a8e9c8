#include <doctest.h>

#include <cmath>
#include <thread>

#include "capqe/embedding_file.hpp"
#include "capqe/error.hpp"
#include "capqe/http_provider.hpp"
#include "capqe/mock_providers.hpp"
#include "support.hpp"

using namespace capqe;
using namespace capqe::test;

namespace {

double norm(const EmbeddingVector& v) {
  double s = 0.0;
  for (double x : v.values) s += x * x;
  return std::sqrt(s);
}

ProviderConfig http_config(const StubModelServer& server, int retries = 2) {
  ProviderConfig c;
  c.backend = Backend::Http;
  c.endpoint = server.endpoint();
  c.max_retries = retries;
  c.timeout = std::chrono::milliseconds(5000);
  return c;
}

const std::vector<std::string> kTexts = {"A dog runs.", "Two cats sleep on a sofa."};

}  // namespace

TEST_CASE("mock translator round-trips and preserves whitespace") {
  CHECK(MockTranslator::forward("a  dog\truns") == "ur_a  ur_dog\tur_runs");
  CHECK(MockTranslator::backward("ur_a  ur_dog\tur_runs") == "a  dog\truns");
  CHECK(MockTranslator::backward("plain ur_ur_x") == "plain ur_x");
  MockTranslator t;
  const auto out = t.translate(kTexts, Direction::SourceToTarget);
  CHECK(t.translate(out, Direction::TargetToSource) == kTexts);
  CHECK_THROWS_AS(t.translate(std::vector<std::string>{}, Direction::SourceToTarget), ArgumentError);
}

TEST_CASE("mock embedders are deterministic, unit-norm and seed-dependent") {
  MockTextEmbedder a(32, 1), b(32, 1), c(32, 2);
  const auto ea = a.embed_text_tokens(kTexts);
  CHECK(ea == b.embed_text_tokens(kTexts));
  CHECK(ea != c.embed_text_tokens(kTexts));
  CHECK(ea[0].size() == mock_tokens(kTexts[0]).size());
  for (const auto& seq : ea) {
    for (const auto& v : seq) {
      CHECK(v.dim() == 32);
      CHECK(norm(v) == doctest::Approx(1.0));
    }
  }
  CHECK(MockTextEmbedder(8, 0).embed_text_tokens(std::vector<std::string>{"  "})[0].size() == 1);

  MockMultimodalEmbedder mm(32, 0);
  const std::vector<std::string> refs = {"a dog runs", "something else"};
  const auto e = mm.embed_multimodal(refs, kTexts);
  CHECK(e.image_vectors[0] == e.text_vectors[0]);
  CHECK(e.image_vectors[1] != e.text_vectors[1]);
  for (const auto& v : e.text_vectors) CHECK(norm(v) == doctest::Approx(1.0));
}

TEST_CASE("mock QE scorer range, agreement and fixed value") {
  MockQeScorer qe(0.76, std::nullopt, 0);
  MockTranslator t;
  const auto good = t.translate(kTexts, Direction::SourceToTarget);
  const auto s1 = qe.qe_score(kTexts, good);
  CHECK(s1 == qe.qe_score(kTexts, good));
  for (double v : s1) CHECK((v >= 0.66 && v <= 0.86));
  const std::vector<std::string> bad = {"ur_x", "ur_y ur_z"};
  for (double v : qe.qe_score(kTexts, bad)) CHECK(v == 0.0);
  MockQeScorer fixed(0.76, 0.3, 0);
  CHECK(fixed.qe_score(kTexts, bad) == std::vector<double>{0.3, 0.3});
  CHECK_THROWS_AS(qe.qe_score(kTexts, std::vector<std::string>{"one"}), ArgumentError);
}

TEST_CASE("mock QE scorer averages its configured mean on faithful translations") {
  MockQeScorer qe(0.6, std::nullopt, 9);
  std::vector<std::string> src;
  for (int i = 0; i < 2000; ++i) src.push_back("caption number " + std::to_string(i));
  MockTranslator t;
  const auto scores = qe.qe_score(src, t.translate(src, Direction::SourceToTarget));
  double sum = 0.0;
  for (double v : scores) sum += v;
  CHECK(sum / 2000.0 == doctest::Approx(0.6).epsilon(0.01));
}

TEST_CASE("mock refiner rewrites then substitutes") {
  MockRefiner r({{"ur_a ur_dog", "ur_the ur_dog"}}, {{"cat", "kitten"}, {"ur_", "UR_"}});
  const std::vector<std::string> in = {"ur_a ur_dog", "ur_a cat"};
  const auto out = r.refine(in, "fix");
  CHECK(out[0] == "ur_the ur_dog");
  CHECK(out[1] == "UR_a kitten");
  MockRefiner identity({}, {});
  CHECK(identity.refine(in, "fix") == in);
}

TEST_CASE("provider config validation") {
  ProviderConfig c;
  CHECK_NOTHROW(c.validate());
  c.backend = Backend::Http;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.endpoint = "http://127.0.0.1:1";
  CHECK_NOTHROW(c.validate());
  c.max_in_flight = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  ProviderConfig m;
  m.endpoint = "http://x";
  CHECK_THROWS_AS(m.validate(), ConfigError);
  m.endpoint.clear();
  m.fixed_value = 1.5;
  CHECK_THROWS_AS(m.validate(), ConfigError);
  CHECK(parse_backend("http") == Backend::Http);
  CHECK_THROWS_AS(parse_backend("grpc"), ConfigError);
  CHECK(parse_provider_kind(to_string(ProviderKind::QeScorer)) == ProviderKind::QeScorer);
}

TEST_CASE("http provider speaks the wire protocol") {
  StubModelServer server;
  HttpProvider p(http_config(server));
  const auto fwd = p.translate(kTexts, Direction::SourceToTarget);
  CHECK(fwd == MockTranslator().translate(kTexts, Direction::SourceToTarget));
  CHECK(p.translate(fwd, Direction::TargetToSource) == kTexts);
  const auto emb = p.embed_text_tokens(kTexts);
  CHECK(emb == MockTextEmbedder(16, 0).embed_text_tokens(kTexts));
  const std::vector<std::string> refs = {"a dog runs", "cats"};
  const auto mm = p.embed_multimodal(refs, kTexts);
  CHECK(mm.image_vectors.size() == 2);
  for (const auto& v : mm.image_vectors) CHECK(norm(v) == doctest::Approx(1.0));
  CHECK(p.qe_score(kTexts, fwd).size() == 2);
  CHECK(p.refine(fwd, "fix") == fwd);
}

TEST_CASE("endpoint with a path prefix") {
  StubModelServer server;
  ProviderConfig c = http_config(server);
  c.endpoint += "/";
  HttpProvider p(c);
  CHECK(p.translate(kTexts, Direction::SourceToTarget).size() == 2);
}

TEST_CASE("5xx responses are retried") {
  StubModelServer server;
  HttpProvider p(http_config(server, 2));
  server.fail_next(2, 503);
  CHECK(p.translate(kTexts, Direction::SourceToTarget).size() == 2);
  CHECK(server.requests() == 3);
  CHECK(p.requests_sent() == 3);

  server.fail_next(3, 500);
  CHECK_THROWS_AS(p.translate(kTexts, Direction::SourceToTarget), ProviderError);
}

TEST_CASE("4xx responses are not retried") {
  StubModelServer server;
  HttpProvider p(http_config(server, 5));
  server.fail_next(1, 400);
  CHECK_THROWS_AS(p.qe_score(kTexts, kTexts), ProviderError);
  CHECK(server.requests() == 1);
}

TEST_CASE("malformed responses fail without retry") {
  StubModelServer server;
  HttpProvider p(http_config(server, 5));
  server.override_body("not json");
  CHECK_THROWS_AS(p.translate(kTexts, Direction::SourceToTarget), ProviderError);
  CHECK(server.requests() == 1);
  server.override_body("{\"outputs\": [\"only one\"]}");
  CHECK_THROWS_AS(p.translate(kTexts, Direction::SourceToTarget), ProviderError);
  server.override_body("{\"outputs\": [1, 2]}");
  CHECK_THROWS_AS(p.refine(kTexts, "x"), ProviderError);
  server.override_body("{\"image_vectors\": [[0, 0]], \"text_vectors\": [[1, 0]]}");
  const std::vector<std::string> one = {"x"};
  CHECK_THROWS_AS(p.embed_multimodal(one, one), ProviderError);
  server.override_body("{\"outputs\": [[[1, 0], [1]]]}");
  CHECK_THROWS_AS(p.embed_text_tokens(one), ProviderError);
}

TEST_CASE("unreachable endpoint is a provider error") {
  ProviderConfig c;
  c.backend = Backend::Http;
  c.endpoint = "http://127.0.0.1:1";
  c.max_retries = 1;
  c.timeout = std::chrono::milliseconds(500);
  HttpProvider p(c);
  CHECK_THROWS_AS(p.translate(kTexts, Direction::SourceToTarget), ProviderError);
  CHECK(p.requests_sent() == 2);
}

TEST_CASE("in-flight requests are capped") {
  StubModelServer server;
  server.set_delay_ms(30);
  ProviderConfig c = http_config(server);
  c.max_in_flight = 2;
  HttpProvider p(c);
  std::vector<std::jthread> threads;
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([&] { p.translate(kTexts, Direction::SourceToTarget); });
  }
  threads.clear();
  CHECK(server.requests() == 8);
  CHECK(server.max_concurrent() <= 2);
  CHECK(server.max_concurrent() >= 1);
}

TEST_CASE("embedding file round trip") {
  TempDir dir;
  EmbeddingTable t;
  t.dim = 3;
  t.entries = {{"img/1.jpg", {1.0f, 0.0f, 0.5f}}, {"ترجمہ", {0.0f, -2.0f, 0.25f}}};
  write_embedding_file(dir / "e.bin", t);
  const auto back = read_embedding_file(dir / "e.bin");
  CHECK(back.dim == 3);
  CHECK(back.entries == t.entries);
  CHECK(*back.find("ترجمہ") == t.entries[1].second);
  CHECK(back.find("missing") == nullptr);

  const auto bytes = read_file(dir / "e.bin");
  write_file(dir / "short.bin", bytes.substr(0, bytes.size() - 2));
  CHECK_THROWS_AS(read_embedding_file(dir / "short.bin"), ParseError);
  CHECK_THROWS_AS(read_embedding_file(dir / "none.bin"), ArgumentError);
  t.entries[0].second.push_back(1.0f);
  CHECK_THROWS_AS(write_embedding_file(dir / "bad.bin", t), ArgumentError);
}

TEST_CASE("precomputed image embedder") {
  EmbeddingTable t;
  t.dim = 16;
  std::vector<float> v(16, 0.0f);
  v[3] = 2.0f;
  t.entries = {{"img1", v}};
  PrecomputedImageEmbedder e(t, std::make_shared<MockMultimodalEmbedder>(16, 0));
  const std::vector<std::string> refs = {"img1"}, texts = {"a dog"};
  const auto out = e.embed_multimodal(refs, texts);
  CHECK(out.image_vectors[0].values[3] == doctest::Approx(1.0));
  CHECK(out.text_vectors[0] == MockMultimodalEmbedder(16, 0).embed_string("a dog"));
  const std::vector<std::string> unknown = {"img2"};
  CHECK_THROWS_AS(e.embed_multimodal(unknown, texts), ProviderError);
  PrecomputedImageEmbedder wrong_dim(t, std::make_shared<MockMultimodalEmbedder>(8, 0));
  CHECK_THROWS_AS(wrong_dim.embed_multimodal(refs, texts), ProviderError);
}

TEST_CASE("factory honours the embedding file") {
  TempDir dir;
  EmbeddingTable t;
  t.dim = 64;
  t.entries = {{"img1", std::vector<float>(64, 1.0f)}};
  write_embedding_file(dir / "e.bin", t);
  ProviderConfig c;
  c.kind = ProviderKind::MultimodalEmbedder;
  c.embedding_file = (dir / "e.bin").string();
  auto e = make_multimodal_embedder(c);
  const std::vector<std::string> refs = {"img1"}, texts = {"x"};
  CHECK(e->embed_multimodal(refs, texts).image_vectors[0].values[0] == doctest::Approx(0.125));
}
