// Copyright 2026 The RC3E Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <sys/socket.h>

#include <boost/asio.hpp>
#include <boost/beast/core/detail/base64.hpp>
#include <condition_variable>
#include <cstring>
#include <list>
#include <thread>

#include "rc3e/error.h"
#include "rc3e/middleware.h"

namespace rc3e {

namespace asio = boost::asio;
using Protocol = asio::generic::stream_protocol;
using Socket = Protocol::socket;
using Acceptor = asio::basic_socket_acceptor<Protocol>;

namespace {

struct ParsedAddress {
  bool is_unix = false;
  std::string path;
  std::string host;
  std::string port;
};

ParsedAddress ParseAddress(std::string address, ErrorCode on_error) {
  ParsedAddress a;
  if (address.rfind("unix:", 0) == 0) {
    a.is_unix = true;
    a.path = address.substr(5);
    if (a.path.rfind("//", 0) == 0) a.path = a.path.substr(2);
    if (a.path.empty()) throw Error(on_error, "unix address needs a path");
    return a;
  }
  if (address.rfind("tcp://", 0) == 0) address = address.substr(6);
  const size_t colon = address.rfind(':');
  if (colon == std::string::npos || colon + 1 == address.size()) {
    throw Error(on_error, "address must be tcp://host:port or unix:/path, got " + address);
  }
  a.host = address.substr(0, colon);
  a.port = address.substr(colon + 1);
  if (a.host.empty()) a.host = "127.0.0.1";
  return a;
}

Protocol::endpoint ResolveEndpoint(asio::io_context &io, const ParsedAddress &a,
                                   ErrorCode on_error) {
  if (a.is_unix) return Protocol::endpoint(asio::local::stream_protocol::endpoint(a.path));
  boost::system::error_code ec;
  asio::ip::tcp::resolver resolver(io);
  auto results = resolver.resolve(a.host, a.port, ec);
  if (ec || results.empty()) {
    throw Error(on_error, "cannot resolve " + a.host + ":" + a.port + ": " + ec.message());
  }
  return Protocol::endpoint(results.begin()->endpoint());
}

}  // namespace

std::string Base64Encode(std::span<const uint8_t> bytes) {
  namespace b64 = boost::beast::detail::base64;
  std::string out(b64::encoded_size(bytes.size()), '\0');
  out.resize(b64::encode(out.data(), bytes.data(), bytes.size()));
  return out;
}

std::vector<uint8_t> Base64Decode(std::string_view text) {
  namespace b64 = boost::beast::detail::base64;
  if (text.size() % 4 != 0) throw Error(ErrorCode::kBadRequest, "base64 length not a multiple of 4");
  std::vector<uint8_t> out(b64::decoded_size(text.size()));
  const auto [written, read] = b64::decode(out.data(), text.data(), text.size());
  size_t pad = 0;
  while (pad < 2 && pad < text.size() && text[text.size() - 1 - pad] == '=') ++pad;
  if (read + pad < text.size()) throw Error(ErrorCode::kBadRequest, "invalid base64 data");
  out.resize(written);
  return out;
}

// ---------------------------------------------------------------------------
// Server

struct Server::Impl {
  asio::io_context io;
  std::unique_ptr<Acceptor> acceptor;
  std::string unix_path;
  std::thread accept_thread;

  std::mutex mu;
  std::condition_variable stopped_cv;
  bool stopping = false;
  std::list<std::shared_ptr<Socket>> live;
  std::vector<std::thread> workers;
};

Server::Server(const ServiceConfig &config)
    : config_(config),
      hv_(MakeHypervisor(config)),
      dispatcher_(std::make_unique<Dispatcher>(*hv_, config.db_path)),
      impl_(std::make_unique<Impl>()) {}

Server::~Server() { Stop(); }

std::string Server::address() const {
  if (!impl_->unix_path.empty()) return "unix:" + impl_->unix_path;
  const ParsedAddress a = ParseAddress(config_.listen, ErrorCode::kConfigError);
  return "tcp://" + a.host + ":" + std::to_string(port_);
}

std::string Server::ServeLine(SessionContext &session, std::string_view line) {
  std::lock_guard<std::mutex> lock(mu_);
  return dispatcher_->HandleLine(session, line);
}

void Server::Start() {
  const ParsedAddress a = ParseAddress(config_.listen, ErrorCode::kConfigError);
  Impl &im = *impl_;
  try {
    const Protocol::endpoint ep = ResolveEndpoint(im.io, a, ErrorCode::kBindError);
    if (a.is_unix) {
      std::error_code ignored;
      std::filesystem::remove(a.path, ignored);
    }
    im.acceptor = std::make_unique<Acceptor>(im.io);
    im.acceptor->open(ep.protocol());
    if (!a.is_unix) im.acceptor->set_option(asio::socket_base::reuse_address(true));
    im.acceptor->bind(ep);
    im.acceptor->listen();
    if (a.is_unix) {
      im.unix_path = a.path;
    } else {
      asio::ip::tcp::endpoint bound;
      const Protocol::endpoint local = im.acceptor->local_endpoint();
      std::memcpy(bound.data(), local.data(), local.size());
      port_ = bound.port();
    }
  } catch (const boost::system::system_error &e) {
    throw Error(ErrorCode::kBindError, "cannot listen on " + config_.listen + ": " + e.what());
  }

  im.accept_thread = std::thread([this] {
    Impl &im = *impl_;
    while (true) {
      auto sock = std::make_shared<Socket>(im.io);
      boost::system::error_code ec;
      im.acceptor->accept(*sock, ec);
      std::lock_guard<std::mutex> lock(im.mu);
      if (im.stopping) break;
      if (ec) continue;
      im.live.push_back(sock);
      im.workers.emplace_back([this, sock] {
        SessionContext session;
        asio::streambuf buf;
        boost::system::error_code ec;
        while (true) {
          const size_t n = asio::read_until(*sock, buf, '\n', ec);
          if (ec) break;
          std::string line(asio::buffers_begin(buf.data()),
                           asio::buffers_begin(buf.data()) + static_cast<std::ptrdiff_t>(n - 1));
          buf.consume(n);
          if (!line.empty() && line.back() == '\r') line.pop_back();
          if (line.find_first_not_of(" \t") == std::string::npos) continue;
          std::string reply = ServeLine(session, line);
          reply.push_back('\n');
          asio::write(*sock, asio::buffer(reply), ec);
          if (ec) break;
        }
        std::lock_guard<std::mutex> lock(impl_->mu);
        impl_->live.remove(sock);
      });
    }
  });
}

void Server::Wait() {
  std::unique_lock<std::mutex> lock(impl_->mu);
  impl_->stopped_cv.wait(lock, [&] { return impl_->stopping; });
}

void Server::Stop() {
  Impl &im = *impl_;
  std::vector<std::thread> workers;
  {
    std::lock_guard<std::mutex> lock(im.mu);
    if (im.stopping && !im.accept_thread.joinable()) return;
    im.stopping = true;
    im.stopped_cv.notify_all();
    if (im.acceptor) ::shutdown(im.acceptor->native_handle(), SHUT_RDWR);
    for (auto &sock : im.live) {
      boost::system::error_code ec;
      sock->shutdown(asio::socket_base::shutdown_both, ec);
    }
  }
  if (im.accept_thread.joinable()) im.accept_thread.join();
  {
    std::lock_guard<std::mutex> lock(im.mu);
    workers.swap(im.workers);
  }
  for (auto &t : workers) t.join();
  if (im.acceptor) {
    boost::system::error_code ec;
    im.acceptor->close(ec);
  }
  if (!im.unix_path.empty()) {
    std::error_code ignored;
    std::filesystem::remove(im.unix_path, ignored);
  }
}

// ---------------------------------------------------------------------------
// Client

struct Client::Impl {
  asio::io_context io;
  Socket socket{io};
  asio::streambuf buf;
};

Client::Client(const std::string &address) : impl_(std::make_unique<Impl>()) {
  const ParsedAddress a = ParseAddress(address, ErrorCode::kInvalidArgument);
  const Protocol::endpoint ep = ResolveEndpoint(impl_->io, a, ErrorCode::kIoError);
  boost::system::error_code ec;
  impl_->socket.connect(ep, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot connect to " + address + ": " + ec.message());
}

Client::~Client() = default;

std::string Client::RoundTrip(const std::string &line) {
  boost::system::error_code ec;
  std::string out = line;
  out.push_back('\n');
  asio::write(impl_->socket, asio::buffer(out), ec);
  if (ec) throw Error(ErrorCode::kIoError, "send failed: " + ec.message());
  const size_t n = asio::read_until(impl_->socket, impl_->buf, '\n', ec);
  if (ec) throw Error(ErrorCode::kIoError, "connection closed: " + ec.message());
  std::string reply(asio::buffers_begin(impl_->buf.data()),
                    asio::buffers_begin(impl_->buf.data()) + static_cast<std::ptrdiff_t>(n - 1));
  impl_->buf.consume(n);
  return reply;
}

nlohmann::json Client::Call(const std::string &cmd, const std::string &user,
                            const nlohmann::json &args) {
  const nlohmann::json request{{"id", next_id_++}, {"cmd", cmd}, {"user", user}, {"args", args}};
  try {
    return nlohmann::json::parse(RoundTrip(request.dump()));
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorCode::kIoError, std::string("unreadable reply: ") + e.what());
  }
}

}  // namespace rc3e
