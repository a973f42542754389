#include "quinelab/server.hpp"

#include <chrono>
#include <csignal>
#include <deque>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

namespace quinelab {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

std::string_view mime_type(const std::filesystem::path& p) {
  auto ext = p.extension().string();
  if (ext == ".html" || ext == ".htm") return "text/html";
  if (ext == ".js" || ext == ".mjs") return "application/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  if (ext == ".mol" || ext == ".txt") return "text/plain";
  return "application/octet-stream";
}

// Resolves a request target under root, refusing anything that escapes it.
std::optional<std::filesystem::path> resolve(const std::filesystem::path& root,
                                             std::string_view target) {
  std::string path(target.substr(0, target.find('?')));
  if (path.empty() || path[0] != '/' || path.find("..") != std::string::npos) return std::nullopt;
  if (path.back() == '/') path += "index.html";
  return root / path.substr(1);
}

class WsConnection : public std::enable_shared_from_this<WsConnection> {
 public:
  WsConnection(tcp::socket socket, const ServerOptions& opt)
      : ws_(std::move(socket)),
        timer_(ws_.get_executor()),
        opt_(opt),
        session_(opt.catalog, opt.session) {}

  void start(http::request<http::string_body> req) {
    ws_.text(true);
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      self->last_ = std::chrono::steady_clock::now();
      self->read();
      self->schedule_tick();
    });
  }

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->closed_ = true;
        self->timer_.cancel();
        return;
      }
      std::string text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      std::istringstream lines(text);
      std::string line;
      while (std::getline(lines, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        self->send(self->session_.handle_line(line));
      }
      self->read();
    });
  }

  void schedule_tick() {
    timer_.expires_after(std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(opt_.tick_seconds)));
    timer_.async_wait([self = shared_from_this()](beast::error_code ec) {
      if (ec || self->closed_) return;
      auto now = std::chrono::steady_clock::now();
      double dt = std::chrono::duration<double>(now - self->last_).count();
      self->last_ = now;
      self->send(self->session_.tick(dt));
      self->schedule_tick();
    });
  }

  void send(const std::vector<Session::Event>& events) {
    for (const auto& e : events) queue_.push_back(encode_event(e));
    session_.set_congested(queue_.size() > opt_.high_water);
    if (!writing_ && !queue_.empty()) write();
  }

  void write() {
    writing_ = true;
    ws_.async_write(asio::buffer(queue_.front()),
                    [self = shared_from_this()](beast::error_code ec, std::size_t) {
                      if (ec) {
                        self->closed_ = true;
                        self->timer_.cancel();
                        return;
                      }
                      self->queue_.pop_front();
                      self->session_.set_congested(self->queue_.size() > self->opt_.high_water);
                      if (self->queue_.empty()) {
                        self->writing_ = false;
                      } else {
                        self->write();
                      }
                    });
  }

  websocket::stream<beast::tcp_stream> ws_;
  asio::steady_timer timer_;
  const ServerOptions& opt_;
  Session session_;
  beast::flat_buffer buffer_;
  std::deque<std::string> queue_;
  bool writing_ = false;
  bool closed_ = false;
  std::chrono::steady_clock::time_point last_;
};

class HttpConnection : public std::enable_shared_from_this<HttpConnection> {
 public:
  HttpConnection(tcp::socket socket, const ServerOptions& opt)
      : stream_(std::move(socket)), opt_(opt) {}

  void start() { read(); }

 private:
  void read() {
    req_ = {};
    http::async_read(stream_, buffer_, req_,
                     [self = shared_from_this()](beast::error_code ec, std::size_t) {
                       if (ec) return;
                       self->dispatch();
                     });
  }

  void dispatch() {
    if (websocket::is_upgrade(req_)) {
      std::make_shared<WsConnection>(stream_.release_socket(), opt_)->start(std::move(req_));
      return;
    }
    auto res = std::make_shared<http::response<http::string_body>>(respond());
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
      if (ec || res->need_eof()) {
        beast::error_code ignored;
        self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
        return;
      }
      self->read();
    });
  }

  http::response<http::string_body> respond() {
    http::response<http::string_body> res;
    res.version(req_.version());
    res.keep_alive(req_.keep_alive());
    auto fail = [&](http::status s, std::string body) {
      res.result(s);
      res.set(http::field::content_type, "text/plain");
      res.body() = std::move(body);
      res.prepare_payload();
      return res;
    };
    if (!opt_.static_dir) return fail(http::status::not_found, "protocol endpoint only\n");
    if (req_.method() != http::verb::get && req_.method() != http::verb::head)
      return fail(http::status::method_not_allowed, "GET only\n");
    auto t = req_.target();
    auto path = resolve(*opt_.static_dir, std::string_view(t.data(), t.size()));
    if (!path) return fail(http::status::bad_request, "bad path\n");
    std::ifstream in(*path, std::ios::binary);
    if (!in || std::filesystem::is_directory(*path)) return fail(http::status::not_found, "not found\n");
    std::ostringstream body;
    body << in.rdbuf();
    res.result(http::status::ok);
    auto mime = mime_type(*path);
    res.set(http::field::content_type, beast::string_view(mime.data(), mime.size()));
    if (req_.method() == http::verb::get) res.body() = body.str();
    res.prepare_payload();
    return res;
  }

  beast::tcp_stream stream_;
  const ServerOptions& opt_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
};

}  // namespace

struct Server::Impl {
  ServerOptions opt;
  asio::io_context ioc{1};
  tcp::acceptor acceptor{ioc};
  asio::signal_set signals{ioc};

  void accept() {
    acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;  // closed by stop()
      std::make_shared<HttpConnection>(std::move(socket), opt)->start();
      accept();
    });
  }
};

Server::Server(ServerOptions opt) : impl_(std::make_unique<Impl>()) {
  impl_->opt = std::move(opt);
  beast::error_code ec;
  auto addr = asio::ip::make_address(impl_->opt.address, ec);
  if (ec) throw std::runtime_error("bad bind address '" + impl_->opt.address + "'");
  tcp::endpoint ep(addr, impl_->opt.port);
  auto& a = impl_->acceptor;
  a.open(ep.protocol(), ec);
  if (!ec) a.set_option(asio::socket_base::reuse_address(true), ec);
  if (!ec) a.bind(ep, ec);
  if (!ec) a.listen(asio::socket_base::max_listen_connections, ec);
  if (ec) throw std::runtime_error("cannot bind " + impl_->opt.address + ":" +
                                   std::to_string(impl_->opt.port) + ": " + ec.message());
}

Server::~Server() = default;

unsigned short Server::port() const { return impl_->acceptor.local_endpoint().port(); }

void Server::run() {
  if (impl_->opt.handle_signals) {
    impl_->signals.add(SIGINT);
    impl_->signals.add(SIGTERM);
    impl_->signals.async_wait([this](beast::error_code, int) { stop(); });
  }
  impl_->accept();
  impl_->ioc.run();
}

void Server::stop() {
  asio::post(impl_->ioc, [this] {
    beast::error_code ignored;
    impl_->acceptor.close(ignored);
    impl_->signals.cancel(ignored);
    impl_->ioc.stop();
  });
}

}  // namespace quinelab
