#include "dex/service/server.hpp"

#include <filesystem>
#include <mutex>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

namespace dex::service {

namespace {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

constexpr std::string_view kSessionPath = "/session";

// Lets the engine thread post wake-ups only while the I/O context exists.
struct Gate {
  std::mutex mutex;
  bool open = true;
};

std::string_view mime_type(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".html") return "text/html; charset=utf-8";
  if (ext == ".js" || ext == ".mjs") return "text/javascript; charset=utf-8";
  if (ext == ".css") return "text/css; charset=utf-8";
  if (ext == ".json") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  if (ext == ".map") return "application/json";
  return "application/octet-stream";
}

// Resolves a request target inside root; empty when it escapes root or is absent.
std::optional<std::filesystem::path> resolve(const std::string& root, std::string_view target) {
  if (root.empty()) {
    return std::nullopt;
  }
  target = target.substr(0, target.find('?'));
  std::string rel(target);
  if (rel.empty() || rel.back() == '/') {
    rel += "index.html";
  }
  const std::filesystem::path rel_path = std::filesystem::path(rel).relative_path();
  for (const auto& part : rel_path) {
    if (part == "..") {
      return std::nullopt;
    }
  }
  std::filesystem::path full = std::filesystem::path(root) / rel_path;
  std::error_code ec;
  if (!std::filesystem::is_regular_file(full, ec)) {
    return std::nullopt;
  }
  return full;
}

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket socket, EngineService& service, const ServerConfig& config,
            std::shared_ptr<Gate> gate)
      : ws_(std::move(socket)),
        service_(service),
        config_(config),
        gate_(std::move(gate)),
        timer_(ws_.get_executor()),
        outbox_(std::make_shared<Outbox>()) {}

  void run(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    // The application heartbeat below replaces Beast's idle timeout.
    websocket::stream_base::timeout t{};
    t.handshake_timeout = std::chrono::seconds(30);
    t.idle_timeout = websocket::stream_base::none();
    t.keep_alive_pings = false;
    ws_.set_option(t);
    ws_.control_callback([this](websocket::frame_type kind, beast::string_view) {
      if (kind == websocket::frame_type::pong) {
        missed_ = 0;
      }
    });
    std::weak_ptr<WsSession> weak = shared_from_this();
    auto executor = ws_.get_executor();
    outbox_->set_notify([weak, executor, gate = gate_] {
      std::lock_guard lock(gate->mutex);
      if (!gate->open) {
        return;
      }
      asio::post(executor, [weak] {
        if (auto self = weak.lock()) {
          self->write_next();
        }
      });
    });
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
      if (ec) {
        return self->shutdown();
      }
      self->open_ = true;
      self->read();
      self->heartbeat();
    });
  }

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        return self->shutdown();
      }
      self->missed_ = 0;
      const std::string text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      self->on_message(text);
      if (!self->closing_) {
        self->read();
      }
    });
  }

  void on_message(const std::string& text) {
    InboundResult r = handle_inbound(session_, text, service_.context());
    for (std::string& reply : r.replies) {
      outbox_->push(std::move(reply));
    }
    if (r.joined) {
      service_.attach(outbox_);
      attached_ = true;
    }
    if (r.forward) {
      service_.submit(outbox_, std::move(*r.forward));
    }
    if (r.close) {
      closing_ = true;
      write_next();
    }
  }

  void write_next() {
    if (!open_ || writing_) {
      return;
    }
    std::optional<std::string> msg = outbox_->pop();
    if (!msg) {
      if (closing_) {
        close(websocket::close_code::policy_error);
      }
      return;
    }
    writing_ = true;
    out_ = std::move(*msg);
    ws_.text(true);
    ws_.async_write(asio::buffer(out_),
                    [self = shared_from_this()](beast::error_code ec, std::size_t) {
                      self->writing_ = false;
                      if (ec) {
                        return self->shutdown();
                      }
                      self->write_next();
                    });
  }

  void heartbeat() {
    timer_.expires_after(config_.ping_interval);
    timer_.async_wait([self = shared_from_this()](beast::error_code ec) {
      if (ec || !self->open_) {
        return;
      }
      if (self->missed_ >= self->config_.max_missed_pings) {
        return self->close(websocket::close_code::going_away);
      }
      ++self->missed_;
      if (!self->pinging_) {
        self->pinging_ = true;
        self->ws_.async_ping({}, [self](beast::error_code ping_ec) {
          self->pinging_ = false;
          if (ping_ec) {
            self->shutdown();
          }
        });
      }
      self->heartbeat();
    });
  }

  void close(websocket::close_code code) {
    if (!open_ || close_sent_) {
      return;
    }
    close_sent_ = true;
    timer_.cancel();
    ws_.async_close(code, [self = shared_from_this()](beast::error_code) { self->shutdown(); });
    // A peer that never answers the close frame is cut off.
    closer_ = std::make_unique<asio::steady_timer>(ws_.get_executor());
    closer_->expires_after(std::chrono::seconds(1));
    closer_->async_wait([self = shared_from_this()](beast::error_code ec) {
      if (!ec) {
        beast::get_lowest_layer(self->ws_).close();
      }
    });
  }

  void shutdown() {
    if (attached_) {
      attached_ = false;
      service_.detach(outbox_);
    }
    outbox_->set_notify({});
    open_ = false;
    timer_.cancel();
    if (closer_) {
      closer_->cancel();
    }
    beast::error_code ignored;
    beast::get_lowest_layer(ws_).socket().close(ignored);
  }

  websocket::stream<beast::tcp_stream> ws_;
  EngineService& service_;
  const ServerConfig& config_;
  std::shared_ptr<Gate> gate_;
  asio::steady_timer timer_;
  std::unique_ptr<asio::steady_timer> closer_;
  std::shared_ptr<Outbox> outbox_;
  ClientSession session_;
  beast::flat_buffer buffer_;
  std::string out_;
  bool open_ = false;
  bool writing_ = false;
  bool pinging_ = false;
  bool closing_ = false;
  bool close_sent_ = false;
  bool attached_ = false;
  int missed_ = 0;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket socket, EngineService& service, const ServerConfig& config,
              std::shared_ptr<Gate> gate)
      : stream_(std::move(socket)), service_(service), config_(config), gate_(std::move(gate)) {}

  void run() {
    stream_.expires_after(std::chrono::seconds(30));
    req_ = {};
    http::async_read(stream_, buffer_, req_,
                     [self = shared_from_this()](beast::error_code ec, std::size_t) {
                       if (ec) {
                         beast::error_code ignored;
                         self->stream_.socket().shutdown(tcp::socket::shutdown_both, ignored);
                         return;
                       }
                       self->on_request();
                     });
  }

 private:
  void on_request() {
    const std::string_view target(req_.target().data(), req_.target().size());
    if (websocket::is_upgrade(req_)) {
      if (target == kSessionPath) {
        stream_.expires_never();
        std::make_shared<WsSession>(stream_.release_socket(), service_, config_, gate_)
            ->run(std::move(req_));
        return;
      }
      return reply(http::status::not_found, "no such endpoint\n", "text/plain");
    }
    if (req_.method() != http::verb::get && req_.method() != http::verb::head) {
      return reply(http::status::method_not_allowed, "GET only\n", "text/plain");
    }
    const auto path = resolve(config_.ui_dir, target);
    if (!path) {
      return reply(http::status::not_found, "not found\n", "text/plain");
    }
    http::file_body::value_type body;
    beast::error_code ec;
    body.open(path->string().c_str(), beast::file_mode::scan, ec);
    if (ec) {
      return reply(http::status::not_found, "not found\n", "text/plain");
    }
    auto res = std::make_shared<http::response<http::file_body>>(
        std::piecewise_construct, std::make_tuple(std::move(body)),
        std::make_tuple(http::status::ok, req_.version()));
    res->set(http::field::content_type, std::string(mime_type(*path)));
    res->keep_alive(req_.keep_alive());
    res->prepare_payload();
    send(res);
  }

  void reply(http::status status, std::string body, std::string_view type) {
    auto res = std::make_shared<http::response<http::string_body>>(status, req_.version());
    res->set(http::field::content_type, std::string(type));
    res->keep_alive(req_.keep_alive());
    res->body() = std::move(body);
    res->prepare_payload();
    send(res);
  }

  template <typename Response>
  void send(std::shared_ptr<Response> res) {
    http::async_write(stream_, *res,
                      [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
                        if (ec || !res->keep_alive()) {
                          beast::error_code ignored;
                          self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
                          return;
                        }
                        self->run();
                      });
  }

  beast::tcp_stream stream_;
  EngineService& service_;
  const ServerConfig& config_;
  std::shared_ptr<Gate> gate_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
};

}  // namespace

struct Server::Impl {
  Impl(EngineService& s, ServerConfig c) : service(s), config(std::move(c)), acceptor(io) {}

  void accept() {
    acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec) {
        return;
      }
      std::make_shared<HttpSession>(std::move(socket), service, config, gate)->run();
      accept();
    });
  }

  EngineService& service;
  ServerConfig config;
  std::shared_ptr<Gate> gate = std::make_shared<Gate>();
  asio::io_context io{1};
  tcp::acceptor acceptor;
  std::thread thread;
};

Server::Server(EngineService& service, ServerConfig config)
    : impl_(std::make_unique<Impl>(service, std::move(config))) {}

Server::~Server() { stop(); }

void Server::start() {
  beast::error_code ec;
  const tcp::endpoint endpoint(asio::ip::make_address(impl_->config.address, ec),
                               impl_->config.port);
  if (ec) {
    throw Error("bad listen address " + impl_->config.address);
  }
  auto& a = impl_->acceptor;
  a.open(endpoint.protocol(), ec);
  if (!ec) a.set_option(asio::socket_base::reuse_address(true), ec);
  if (!ec) a.bind(endpoint, ec);
  if (!ec) a.listen(asio::socket_base::max_listen_connections, ec);
  if (ec) {
    throw Error("cannot listen on " + impl_->config.address + ":" +
                std::to_string(impl_->config.port) + ": " + ec.message());
  }
  impl_->accept();
  impl_->thread = std::thread([this] { impl_->io.run(); });
}

void Server::stop() {
  if (!impl_ || !impl_->thread.joinable()) {
    return;
  }
  {
    std::lock_guard lock(impl_->gate->mutex);
    impl_->gate->open = false;
  }
  impl_->io.stop();
  impl_->thread.join();
}

std::uint16_t Server::port() const { return impl_->acceptor.local_endpoint().port(); }

}  // namespace dex::service
