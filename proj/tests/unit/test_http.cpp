#include "grlp/embedder.hpp"
#include "grlp/env.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>
#include <httplib.h>

#include <atomic>
#include <cstdlib>
#include <thread>

namespace grlp {
namespace {

// Local stub server; each test installs its own handlers.
class StubServer {
 public:
  StubServer() {
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubServer() {
    server_.stop();
    thread_.join();
  }
  httplib::Server& server() { return server_; }
  std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

HttpClientOptions options(const StubServer& s) {
  HttpClientOptions o;
  o.base_url = s.base_url();
  o.model = "stub-model";
  o.backoff_base = std::chrono::milliseconds(1);
  o.timeout = std::chrono::seconds(5);
  return o;
}

nlohmann::json chat_reply(const std::string& text) {
  return {{"choices", {{{"message", {{"role", "assistant"}, {"content", text}}}}}}};
}

TEST(HttpEnvironment, RetriesRateLimitThenSucceeds) {
  StubServer stub;
  std::atomic<int> calls{0};
  stub.server().Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    const auto body = nlohmann::json::parse(req.body);
    EXPECT_EQ(body.at("model"), "stub-model");
    EXPECT_EQ(body.at("messages").at(0).at("content"), "ping");
    if (++calls <= 2) {
      res.status = 429;
      return;
    }
    res.set_content(chat_reply("OK").dump(), "application/json");
  });
  HttpEnvironment env(options(stub));
  const auto r = env.complete({"ping"});
  EXPECT_EQ(r.text, "OK");
  EXPECT_EQ(r.provider_meta.at("attempts"), 3);
  EXPECT_EQ(calls.load(), 3);
}

TEST(HttpEnvironment, UnauthorizedIsNotRetried) {
  StubServer stub;
  std::atomic<int> calls{0};
  stub.server().Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    ++calls;
    res.status = 401;
    res.set_content("{\"error\":\"bad key\"}", "application/json");
  });
  HttpEnvironment env(options(stub));
  try {
    env.complete({"ping"});
    FAIL();
  } catch (const HttpError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::request);
    EXPECT_EQ(e.status(), 401);
  }
  EXPECT_EQ(calls.load(), 1);
}

TEST(HttpEnvironment, PersistentServerErrorExhaustsAttempts) {
  StubServer stub;
  std::atomic<int> calls{0};
  stub.server().Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    ++calls;
    res.status = 503;
  });
  HttpEnvironment env(options(stub));
  EXPECT_GRLP_ERROR(env.complete({"ping"}), ErrorKind::transport);
  EXPECT_EQ(calls.load(), 3);
}

TEST(HttpEnvironment, SendsBearerToken) {
  StubServer stub;
  std::string auth;
  stub.server().Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    auth = req.get_header_value("Authorization");
    res.set_content(chat_reply("fine").dump(), "application/json");
  });
  ::setenv("GRLP_STUB_TOKEN", "secret", 1);
  auto o = options(stub);
  o.token_env = "GRLP_STUB_TOKEN";
  EXPECT_EQ(HttpEnvironment(o).complete({"x"}).text, "fine");
  EXPECT_EQ(auth, "Bearer secret");
  o.token_env = "GRLP_STUB_TOKEN_UNSET";
  EXPECT_GRLP_ERROR(HttpEnvironment(o).complete({"x"}), ErrorKind::config);
}

TEST(HttpEnvironment, MalformedReplyIsProtocolError) {
  StubServer stub;
  stub.server().Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content("{\"choices\":[]}", "application/json");
  });
  EXPECT_GRLP_ERROR(HttpEnvironment(options(stub)).complete({"x"}), ErrorKind::protocol);
}

TEST(HttpEmbedder, ReadsEmbedding) {
  StubServer stub;
  stub.server().Post("/v1/embeddings", [&](const httplib::Request& req, httplib::Response& res) {
    EXPECT_EQ(nlohmann::json::parse(req.body).at("input").at(0), "hello");
    res.set_content(R"({"data":[{"embedding":[3.0,4.0]}]})", "application/json");
  });
  HttpEmbedder emb(options(stub), 2);
  const auto v = emb.embed_text("hello");
  EXPECT_NEAR(v[0], 0.6, 1e-15);
  EXPECT_NEAR(v[1], 0.8, 1e-15);
  EXPECT_GRLP_ERROR(HttpEmbedder(options(stub), 3).embed_text("hello"), ErrorKind::shape);
}

}  // namespace
}  // namespace grlp
