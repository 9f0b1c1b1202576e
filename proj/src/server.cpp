#include <atomic>
#include <chrono>
#include <condition_variable>
#include <csignal>
#include <deque>
#include <filesystem>
#include <mutex>
#include <thread>

#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/signal_set.hpp>
#include <boost/asio/steady_timer.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <spdlog/spdlog.h>

#include "gsik/error.hpp"
#include "gsik/log.hpp"
#include "gsik/service.hpp"

namespace gsik {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {

struct Shared {
  std::shared_ptr<const Skeleton> skeleton;
  ServerOptions options;
  std::atomic<std::uint64_t> dropped_ticks{0};
};

beast::string_view mime_type(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".html" || ext == ".htm") return "text/html";
  if (ext == ".js" || ext == ".mjs") return "application/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  if (ext == ".png") return "image/png";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".ico") return "image/x-icon";
  if (ext == ".wasm") return "application/wasm";
  return "application/octet-stream";
}

class SocketSession : public std::enable_shared_from_this<SocketSession> {
 public:
  SocketSession(tcp::socket&& socket, std::shared_ptr<Shared> shared)
      : ws_(std::move(socket)),
        timer_(ws_.get_executor()),
        shared_(std::move(shared)),
        service_(shared_->skeleton),
        period_(std::chrono::duration_cast<std::chrono::steady_clock::duration>(
            std::chrono::duration<double>(1.0 / shared_->options.tick_hz))) {}

  void run(http::request<http::string_body> request) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.text(true);
    ws_.async_accept(request, beast::bind_front_handler(&SocketSession::on_accept, shared_from_this()));
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return logger()->debug("websocket accept failed: {}", ec.message());
    send(service_.greeting());
    next_tick_ = std::chrono::steady_clock::now() + period_;
    arm_timer();
    read();
  }

  void read() {
    ws_.async_read(buffer_, beast::bind_front_handler(&SocketSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      closed_ = true;
      timer_.cancel();
      if (ec != websocket::error::closed) logger()->debug("websocket read ended: {}", ec.message());
      return;
    }
    const std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    send(service_.handle_text(text));
    read();
  }

  void arm_timer() {
    timer_.expires_at(next_tick_);
    timer_.async_wait(beast::bind_front_handler(&SocketSession::on_tick, shared_from_this()));
  }

  void on_tick(beast::error_code ec) {
    if (ec || closed_) return;
    const double dt = std::chrono::duration<double>(period_).count();
    send(service_.tick(dt));
    next_tick_ += period_;
    const auto now = std::chrono::steady_clock::now();
    if (next_tick_ < now) {
      const auto behind = (now - next_tick_) / period_ + 1;
      shared_->dropped_ticks += static_cast<std::uint64_t>(behind);
      next_tick_ += behind * period_;
    }
    arm_timer();
  }

  void send(const std::vector<wire::ServerMessage>& messages) {
    for (const auto& m : messages) outbox_.push_back(wire::serialize(m));
    if (!writing_) write_next();
  }

  void write_next() {
    if (outbox_.empty() || closed_) {
      writing_ = false;
      return;
    }
    writing_ = true;
    ws_.async_write(net::buffer(outbox_.front()),
                    beast::bind_front_handler(&SocketSession::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    if (ec) {
      closed_ = true;
      writing_ = false;
      timer_.cancel();
      return;
    }
    outbox_.pop_front();
    write_next();
  }

  websocket::stream<beast::tcp_stream> ws_;
  net::steady_timer timer_;
  std::shared_ptr<Shared> shared_;
  ServiceSession service_;
  std::chrono::steady_clock::duration period_;
  std::chrono::steady_clock::time_point next_tick_;
  beast::flat_buffer buffer_;
  std::deque<std::string> outbox_;
  bool writing_ = false;
  bool closed_ = false;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket&& socket, std::shared_ptr<Shared> shared)
      : stream_(std::move(socket)), shared_(std::move(shared)) {}

  void run() { read(); }

 private:
  void read() {
    request_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, request_, beast::bind_front_handler(&HttpSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec == http::error::end_of_stream) {
      stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
      return;
    }
    if (ec) return;
    if (websocket::is_upgrade(request_)) {
      stream_.expires_never();
      std::make_shared<SocketSession>(stream_.release_socket(), shared_)->run(std::move(request_));
      return;
    }
    respond();
  }

  template <class Body>
  void finish(http::response<Body>&& res) {
    auto sp = std::make_shared<http::response<Body>>(std::move(res));
    http::async_write(stream_, *sp, [self = shared_from_this(), sp](beast::error_code ec, std::size_t) {
      if (ec) return;
      if (sp->need_eof()) {
        self->stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
        return;
      }
      self->read();
    });
  }

  void simple(http::status status, std::string text) {
    http::response<http::string_body> res{status, request_.version()};
    res.set(http::field::content_type, "text/plain");
    res.keep_alive(request_.keep_alive());
    res.body() = std::move(text);
    res.prepare_payload();
    finish(std::move(res));
  }

  void respond() {
    if (request_.method() != http::verb::get && request_.method() != http::verb::head) {
      return simple(http::status::bad_request, "unsupported method\n");
    }
    const std::string& root = shared_->options.static_dir;
    std::string target(request_.target());
    if (auto q = target.find('?'); q != std::string::npos) target.resize(q);
    if (root.empty() || target.empty() || target[0] != '/' || target.find("..") != std::string::npos) {
      return simple(http::status::not_found, "not found\n");
    }
    if (target.back() == '/') target += "index.html";
    const std::filesystem::path path = std::filesystem::path(root) / target.substr(1);

    beast::error_code ec;
    http::file_body::value_type body;
    body.open(path.c_str(), beast::file_mode::scan, ec);
    if (ec) return simple(http::status::not_found, "not found\n");
    const auto size = body.size();

    if (request_.method() == http::verb::head) {
      http::response<http::empty_body> res{http::status::ok, request_.version()};
      res.set(http::field::content_type, mime_type(path));
      res.content_length(size);
      res.keep_alive(request_.keep_alive());
      return finish(std::move(res));
    }
    http::response<http::file_body> res{std::piecewise_construct, std::make_tuple(std::move(body)),
                                        std::make_tuple(http::status::ok, request_.version())};
    res.set(http::field::content_type, mime_type(path));
    res.content_length(size);
    res.keep_alive(request_.keep_alive());
    finish(std::move(res));
  }

  beast::tcp_stream stream_;
  std::shared_ptr<Shared> shared_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> request_;
};

}  // namespace

struct Server::Impl {
  std::shared_ptr<Shared> shared = std::make_shared<Shared>();
  net::io_context ioc;
  tcp::acceptor acceptor{ioc};
  std::optional<net::signal_set> signals;
  std::vector<std::thread> threads;
  std::mutex mutex;
  std::condition_variable stopped_cv;
  bool running = false;
  bool stopped = false;

  void accept() {
    acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
      if (ec) {
        if (ec != net::error::operation_aborted) logger()->warn("accept failed: {}", ec.message());
        if (!acceptor.is_open()) return;
      } else {
        std::make_shared<HttpSession>(std::move(socket), shared)->run();
      }
      accept();
    });
  }

  void request_stop() {
    {
      std::lock_guard lock(mutex);
      if (stopped) return;
      stopped = true;
    }
    ioc.stop();
    stopped_cv.notify_all();
  }
};

Server::Server(std::shared_ptr<const Skeleton> skeleton, ServerOptions options) : impl_(std::make_unique<Impl>()) {
  if (!skeleton) throw Error(ErrorCode::InvalidArgument, "server needs a skeleton");
  if (!(options.tick_hz > 0) || options.threads < 1) {
    throw Error(ErrorCode::InvalidArgument, "tick_hz must be positive and threads >= 1");
  }
  impl_->shared->skeleton = std::move(skeleton);
  impl_->shared->options = std::move(options);
}

Server::~Server() {
  stop();
  for (auto& t : impl_->threads) {
    if (t.joinable()) t.join();
  }
}

void Server::start() {
  Impl& d = *impl_;
  if (d.running) throw Error(ErrorCode::InvalidArgument, "server already started");
  const ServerOptions& o = d.shared->options;
  if (!o.static_dir.empty() && !std::filesystem::is_directory(o.static_dir)) {
    throw Error(ErrorCode::Io, "static directory '" + o.static_dir + "' does not exist");
  }
  try {
    const tcp::endpoint endpoint(net::ip::make_address(o.address), o.port);
    d.acceptor.open(endpoint.protocol());
    d.acceptor.set_option(net::socket_base::reuse_address(true));
    d.acceptor.bind(endpoint);
    d.acceptor.listen(net::socket_base::max_listen_connections);
  } catch (const boost::system::system_error& e) {
    throw Error(ErrorCode::Io, "cannot listen on " + o.address + ":" + std::to_string(o.port) + ": " + e.what());
  }
  if (o.handle_signals) {
    d.signals.emplace(d.ioc, SIGINT, SIGTERM);
    d.signals->async_wait([&d](beast::error_code, int) { d.request_stop(); });
  }
  d.accept();
  d.running = true;
  for (int i = 0; i < o.threads; ++i) d.threads.emplace_back([&d] { d.ioc.run(); });
  logger()->info("listening on {}:{}", o.address, port());
}

unsigned short Server::port() const {
  beast::error_code ec;
  const auto ep = impl_->acceptor.local_endpoint(ec);
  return ec ? 0 : ep.port();
}

std::uint64_t Server::dropped_ticks() const { return impl_->shared->dropped_ticks.load(); }

void Server::wait() {
  std::unique_lock lock(impl_->mutex);
  impl_->stopped_cv.wait(lock, [this] { return impl_->stopped || !impl_->running; });
}

void Server::stop() { impl_->request_stop(); }

}  // namespace gsik
