#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include <spdlog/spdlog.h>

#include <unordered_map>

#include "vicorpus/browser.hpp"

namespace beast = boost::beast;
namespace asio = boost::asio;
using nlohmann::json;

namespace vicorpus::browser {

struct CdpClient::Impl {
  asio::io_context ioc;
  beast::websocket::stream<beast::tcp_stream> ws{ioc};
  beast::flat_buffer buffer;
  std::unordered_map<std::int64_t, json> responses;
  std::unordered_map<std::int64_t, bool> discard;
};

CdpClient::CdpClient(const std::string& host, int port, const std::string& path) : impl_(std::make_unique<Impl>()) {
  try {
    asio::ip::tcp::resolver resolver(impl_->ioc);
    auto results = resolver.resolve(host, std::to_string(port));
    impl_->ws.next_layer().connect(results);
    impl_->ws.read_message_max(512ull << 20);
    impl_->ws.handshake(host + ":" + std::to_string(port), path);
  } catch (const std::exception& e) {
    throw BrowserCrashed(std::string("cannot connect to the browser: ") + e.what());
  }
}

CdpClient::~CdpClient() {
  beast::error_code ec;
  impl_->ws.next_layer().socket().close(ec);
}

std::int64_t CdpClient::write(const std::string& method, const json& params, const std::string& session_id) {
  if (broken_) throw BrowserCrashed("connection already failed");
  const std::int64_t id = next_id_++;
  json msg{{"id", id}, {"method", method}, {"params", params}};
  if (!session_id.empty()) msg["sessionId"] = session_id;
  beast::error_code ec;
  impl_->ws.write(asio::buffer(msg.dump()), ec);
  if (ec) {
    broken_ = true;
    throw BrowserCrashed("websocket write failed: " + ec.message());
  }
  return id;
}

void CdpClient::pump_one(Clock::time_point deadline, const char* what) {
  auto& im = *impl_;
  im.buffer.clear();
  bool done = false;
  beast::error_code ec;
  im.ws.async_read(im.buffer, [&](beast::error_code e, std::size_t) {
    ec = e;
    done = true;
  });
  im.ioc.restart();
  im.ioc.run_until(deadline);
  if (!done) {
    // A half-read frame leaves the stream unusable; the owner must reconnect.
    broken_ = true;
    beast::error_code ignored;
    im.ws.next_layer().socket().cancel(ignored);
    im.ioc.restart();
    im.ioc.run();
    throw NavigationTimeout(std::string("timed out waiting for ") + what);
  }
  if (ec) {
    broken_ = true;
    throw BrowserCrashed("websocket read failed: " + ec.message());
  }
  json msg = json::parse(beast::buffers_to_string(im.buffer.data()), nullptr, false);
  if (msg.is_discarded()) return;
  if (msg.contains("id")) {
    const auto id = msg["id"].get<std::int64_t>();
    if (im.discard.erase(id) == 0) im.responses.emplace(id, std::move(msg));
    return;
  }
  if (handler_ && msg.contains("method")) {
    handler_(msg["method"].get<std::string>(), msg.value("params", json::object()), msg.value("sessionId", ""));
  }
}

json CdpClient::call(const std::string& method, const json& params, const std::string& session_id,
                     Clock::time_point deadline) {
  const std::int64_t id = write(method, params, session_id);
  auto& responses = impl_->responses;
  while (!responses.count(id)) pump_one(deadline, method.c_str());
  json msg = std::move(responses[id]);
  responses.erase(id);
  if (msg.contains("error")) {
    throw PageError(method + " failed: " + msg["error"].value("message", msg["error"].dump()));
  }
  return msg.value("result", json::object());
}

void CdpClient::send(const std::string& method, const json& params, const std::string& session_id) {
  impl_->discard[write(method, params, session_id)] = true;
}

void CdpClient::wait_until(const std::function<bool()>& done, Clock::time_point deadline, const char* what) {
  while (!done()) pump_one(deadline, what);
}

}  // namespace vicorpus::browser
