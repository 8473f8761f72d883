#include "teleop/io/gateway.hpp"

#include <atomic>
#include <deque>
#include <mutex>
#include <thread>
#include <vector>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "teleop/core/errors.hpp"

namespace teleop::io {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using Shared = std::shared_ptr<const std::string>;

namespace {

class Session;

}  // namespace

struct Gateway::Impl {
  Options opts;
  InputHandler on_input;
  asio::io_context ctx;
  asio::executor_work_guard<asio::io_context::executor_type> work{asio::make_work_guard(ctx)};
  tcp::acceptor acceptor{ctx};
  std::thread thread;
  std::vector<std::weak_ptr<Session>> sessions;  // I/O thread only
  std::atomic<std::size_t> waiting{0};
  std::atomic<std::size_t> live{0};
  std::atomic<std::uint64_t> dropped{0};
  unsigned short bound_port = 0;

  void accept();
  void broadcast(const Shared& frame, const Shared& snapshot);
};

namespace {

class Session : public std::enable_shared_from_this<Session> {
 public:
  Session(tcp::socket socket, Gateway::Impl* gw) : ws_(std::move(socket)), gw_(gw) {}

  void start() {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept([self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      self->open_ = true;
      ++self->gw_->live;
      self->read();
    });
  }

  bool open() const { return open_ && !closed_; }
  bool awaiting_snapshot() const { return awaiting_; }

  /// Queues a message; false when the queue is full.
  bool enqueue(Shared msg) {
    if (queue_.size() >= gw_->opts.max_queue) return false;
    queue_.push_back(std::move(msg));
    if (queue_.size() == 1) write();
    return true;
  }

  void deliver(const Shared& frame, const Shared& snapshot) {
    if (!open()) return;
    if (awaiting_) {
      if (!snapshot) return;
      if (enqueue(snapshot)) {
        awaiting_ = false;
        --gw_->waiting;
      }
      return;
    }
    if (!enqueue(frame)) {
      ++gw_->dropped;
      awaiting_ = true;  // deltas were lost; resync from the next snapshot
      ++gw_->waiting;
    }
  }

  void close() {
    if (closed_) return;
    closed_ = true;
    if (open_) --gw_->live;
    if (awaiting_) {
      awaiting_ = false;
      --gw_->waiting;
    }
  }

 private:
  void write() {
    ws_.text(true);
    ws_.async_write(asio::buffer(*queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->close();
        return;
      }
      self->queue_.pop_front();
      if (!self->queue_.empty()) self->write();
    });
  }

  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->close();
        return;
      }
      self->handle(beast::buffers_to_string(self->buffer_.data()));
      self->buffer_.consume(self->buffer_.size());
      self->read();
    });
  }

  void handle(const std::string& text) {
    json msg;
    try {
      msg = json::parse(text);
      if (!msg.is_object() || !msg.contains("type")) throw SchemaError("message needs a \"type\"");
      if (gw_->on_input) gw_->on_input(msg);
    } catch (const std::exception& e) {
      enqueue(std::make_shared<const std::string>(json{{"type", "error"}, {"reason", e.what()}}.dump()));
    }
  }

  websocket::stream<beast::tcp_stream> ws_;
  Gateway::Impl* gw_;  // outlives every session: sessions live in handlers owned by its io_context
  beast::flat_buffer buffer_;
  std::deque<Shared> queue_;
  bool open_ = false;
  bool closed_ = false;
  bool awaiting_ = true;
};

}  // namespace

void Gateway::Impl::accept() {
  acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
    if (ec) return;
    auto s = std::make_shared<Session>(std::move(socket), this);
    ++waiting;
    sessions.push_back(s);
    s->start();
    accept();
  });
}

void Gateway::Impl::broadcast(const Shared& frame, const Shared& snapshot) {
  std::vector<std::weak_ptr<Session>> kept;
  for (auto& w : sessions) {
    auto s = w.lock();
    if (!s) continue;
    s->deliver(frame, snapshot);
    kept.push_back(std::move(w));
  }
  sessions = std::move(kept);
}

Gateway::Gateway(Options opts, InputHandler on_input) : impl_(std::make_unique<Impl>()) {
  impl_->opts = std::move(opts);
  impl_->on_input = std::move(on_input);
  const tcp::endpoint ep(asio::ip::make_address(impl_->opts.address), impl_->opts.port);
  impl_->acceptor.open(ep.protocol());
  impl_->acceptor.set_option(tcp::acceptor::reuse_address(true));
  impl_->acceptor.bind(ep);
  impl_->acceptor.listen();
  impl_->bound_port = impl_->acceptor.local_endpoint().port();
  impl_->accept();
  impl_->thread = std::thread([impl = impl_.get()] { impl->ctx.run(); });
}

Gateway::~Gateway() {
  Impl* impl = impl_.get();
  asio::post(impl->ctx, [impl] {
    beast::error_code ignored;
    impl->acceptor.close(ignored);
    impl->sessions.clear();
    impl->work.reset();
    impl->ctx.stop();
  });
  if (impl->thread.joinable()) impl->thread.join();
}

unsigned short Gateway::port() const { return impl_->bound_port; }
bool Gateway::needs_snapshot() const { return impl_->waiting.load() > 0; }
std::size_t Gateway::session_count() const { return impl_->live.load(); }
std::uint64_t Gateway::frames_dropped() const { return impl_->dropped.load(); }

void Gateway::publish(std::string frame, std::optional<std::string> snapshot) {
  auto f = std::make_shared<const std::string>(std::move(frame));
  Shared s = snapshot ? std::make_shared<const std::string>(std::move(*snapshot)) : nullptr;
  asio::post(impl_->ctx, [impl = impl_.get(), f, s] { impl->broadcast(f, s); });
}

}  // namespace teleop::io
