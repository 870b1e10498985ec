#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "mgtd/paraphrase.hpp"
#include "mgtd/segment.hpp"
#include "synthetic.hpp"

using namespace mgtd;
namespace fs = std::filesystem;

namespace {

bool python3_available() {
  static const bool ok = std::system("python3 -c 'pass' >/dev/null 2>&1") == 0;
  return ok;
}

// Writes a line-delimited JSON echo service that uppercases each sentence.
fs::path write_upper_service(int drop = 0) {
  static std::atomic<int> counter{0};
  const fs::path p = fs::temp_directory_path() /
                     ("mgtd-paraphrase-svc-" + std::to_string(::getpid()) +
                      "-" + std::to_string(counter++) + ".py");
  std::ofstream out(p);
  out << "import sys, json\n"
         "for line in sys.stdin:\n"
         "    req = json.loads(line)\n"
         "    out = [s.upper() for s in req['sentences']]\n";
  if (drop > 0) {
    out << "    out = out[:-" << drop << "] if len(out) >= " << drop
        << " else out\n";
  }
  out << "    print(json.dumps({'paraphrases': out}), flush=True)\n";
  return p;
}

}  // namespace

TEST_CASE("identity paraphraser returns its input unchanged") {
  IdentityParaphraser p;
  const std::vector<std::string> sentences = {"One.", "two  spaced", "caf\xc3\xa9."};
  CHECK(p.paraphrase(sentences, "doc") == sentences);
  CHECK(p.deterministic());
  CHECK(p.name() == "identity");
}

TEST_CASE("noise paraphraser preserves sentence count") {
  NoiseParaphraser p(11);
  const auto docs = testsupport::make_synthetic_corpus(100, 3);
  for (const auto& d : docs) {
    const auto seg = segment(d.text);
    const auto out = p.paraphrase(seg.sentences, d.id);
    REQUIRE(out.size() == seg.sentences.size());
    for (const auto& s : out) CHECK_FALSE(s.empty());
  }
}

TEST_CASE("noise paraphraser always rewrites multi-word sentences") {
  NoiseParaphraser p(17);
  const auto docs = testsupport::make_synthetic_corpus(200, 31);
  for (const auto& d : docs) {
    const auto seg = segment(d.text);
    const auto out = p.paraphrase(seg.sentences, d.id);
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (seg.sentences[i].find(' ') != std::string::npos) {
        CHECK(out[i] != seg.sentences[i]);
      }
    }
  }

  // Degenerate sentences that resist every op.
  const auto single = p.paraphrase({"word."}, "d");
  CHECK(single == std::vector<std::string>{"word."});
  const auto repeated = p.paraphrase({"a a a a."}, "d2");
  REQUIRE(repeated.size() == 1);
  CHECK(repeated[0] != "a a a a.");
}

TEST_CASE("noise paraphraser is a pure function of (seed, doc id)") {
  const std::vector<std::string> sentences = {
      "the good system will make a very big result today.",
      "many people think this is hard because it is new."};

  NoiseParaphraser a(42), b(42), c(43);
  const auto out1 = a.paraphrase(sentences, "doc-1");
  const auto out2 = b.paraphrase(sentences, "doc-1");
  CHECK(out1 == out2);

  // Different seed or different doc id moves the stream.
  const auto other_seed = c.paraphrase(sentences, "doc-1");
  const auto other_doc = a.paraphrase(sentences, "doc-2");
  CHECK(out1 != other_seed);
  CHECK(out1 != other_doc);
}

TEST_CASE("noise paraphraser call order does not matter") {
  const std::vector<std::string> s1 = {"the good system will make a result."};
  const std::vector<std::string> s2 = {"many people think this is very hard."};

  NoiseParaphraser forward(7);
  const auto a1 = forward.paraphrase(s1, "a");
  const auto a2 = forward.paraphrase(s2, "b");

  NoiseParaphraser reversed(7);
  const auto b2 = reversed.paraphrase(s2, "b");
  const auto b1 = reversed.paraphrase(s1, "a");

  CHECK(a1 == b1);
  CHECK(a2 == b2);
}

TEST_CASE("make_paraphraser rejects unknown kinds") {
  CHECK_THROWS_AS(make_paraphraser("fancy", 1), std::runtime_error);
  CHECK_THROWS_AS(make_paraphraser("external", 1, {}), std::runtime_error);
}

TEST_CASE("external paraphraser over a subprocess") {
  if (!python3_available()) {
    MESSAGE("python3 not available; skipping subprocess transport test");
    return;
  }
  const fs::path svc = write_upper_service();
  ExternalEndpoint ep;
  ep.command = "python3 " + svc.string();
  ExternalParaphraser p(ep);

  const std::vector<std::string> sentences = {"hello there.", "second one?"};
  const auto out = p.paraphrase(sentences, "doc");
  CHECK(out == std::vector<std::string>{"HELLO THERE.", "SECOND ONE?"});

  // Repeated calls reuse the same child.
  CHECK(p.paraphrase({"again."}, "doc") == std::vector<std::string>{"AGAIN."});
  fs::remove(svc);
}

TEST_CASE("external paraphraser rejects a wrong-length reply") {
  if (!python3_available()) {
    MESSAGE("python3 not available; skipping subprocess transport test");
    return;
  }
  const fs::path svc = write_upper_service(/*drop=*/1);
  ExternalEndpoint ep;
  ep.command = "python3 " + svc.string();
  ExternalParaphraser p(ep);
  CHECK_THROWS_WITH_AS(p.paraphrase({"one.", "two."}, "doc"),
                       doctest::Contains("received 1"), std::runtime_error);
  fs::remove(svc);
}

TEST_CASE("subprocess transport surfaces a dead child as an error") {
  ExternalEndpoint ep;
  ep.command = "false";
  ExternalParaphraser p(ep);
  CHECK_THROWS_AS(p.paraphrase({"x."}, "doc"), std::runtime_error);
}

TEST_CASE("external paraphraser over http") {
  httplib::Server server;
  server.Post("/paraphrase", [](const httplib::Request& req,
                                httplib::Response& res) {
    auto body = nlohmann::json::parse(req.body);
    nlohmann::json reply;
    std::vector<std::string> out;
    for (const auto& s : body.at("sentences")) {
      out.push_back("<p>" + s.get<std::string>());
    }
    reply["paraphrases"] = out;
    res.set_content(reply.dump(), "application/json");
  });

  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread server_thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  {
    ExternalEndpoint ep;
    ep.http_url = "http://127.0.0.1:" + std::to_string(port) + "/paraphrase";
    ExternalParaphraser p(ep);
    const auto out = p.paraphrase({"alpha.", "beta."}, "doc");
    CHECK(out == std::vector<std::string>{"<p>alpha.", "<p>beta."});
  }

  server.stop();
  server_thread.join();
}

TEST_CASE("http transport rejects non-http schemes") {
  ExternalEndpoint ep;
  ep.http_url = "https://example.com/paraphrase";
  CHECK_THROWS_AS(make_transport(ep), std::runtime_error);
}
