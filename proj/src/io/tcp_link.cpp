#include "teleop/io/tcp_link.hpp"

#include <atomic>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <thread>

#include <boost/asio.hpp>

#include "teleop/core/errors.hpp"
#include "teleop/netlink/ndjson.hpp"

namespace teleop::io {

namespace asio = boost::asio;
using tcp = asio::ip::tcp;

struct TcpLink::Impl {
  Impl(Options o, Receiver r)
      : opts(std::move(o)),
        receiver(std::move(r)),
        model(opts.link),
        work(asio::make_work_guard(ctx)),
        acceptor(ctx),
        socket(ctx),
        delay_timer(ctx),
        start(std::chrono::steady_clock::now()) {}

  double now() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }

  void set_connected() {
    {
      std::lock_guard lock(state_mutex);
      connected = true;
    }
    state_cv.notify_all();
    read_more();
    pump();
  }

  void read_more() {
    socket.async_read_some(asio::buffer(read_buf), [this](boost::system::error_code ec, std::size_t n) {
      if (ec) return;
      try {
        framer.feed(std::string_view(read_buf.data(), n));
        while (auto line = framer.next()) {
          try {
            const Envelope e = net::decode_envelope(*line);
            if (receiver) receiver(e, now());
          } catch (const SchemaError&) {
            ++malformed;
          }
        }
      } catch (const SchemaError&) {
        ++malformed;
        return;  // oversized line: give up on this peer
      }
      read_more();
    });
  }

  // Pending envelopes in delivery-time order (the model never decreases it).
  void pump() {
    if (!connected || writing || delayed.empty()) return;
    const auto due = start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                 std::chrono::duration<double>(delayed.front().first));
    if (due > std::chrono::steady_clock::now()) {
      delay_timer.expires_at(due);
      delay_timer.async_wait([this](boost::system::error_code ec) {
        if (!ec) pump();
      });
      return;
    }
    writing = true;
    current = std::move(delayed.front().second);
    delayed.pop_front();
    asio::async_write(socket, asio::buffer(current), [this](boost::system::error_code ec, std::size_t) {
      writing = false;
      if (!ec) pump();
    });
  }

  Options opts;
  Receiver receiver;
  net::LinkModel model;
  asio::io_context ctx;
  asio::executor_work_guard<asio::io_context::executor_type> work;
  tcp::acceptor acceptor;
  tcp::socket socket;
  asio::steady_timer delay_timer;
  std::chrono::steady_clock::time_point start;
  std::thread thread;

  std::mutex state_mutex;
  std::condition_variable state_cv;
  bool connected = false;  // written under state_mutex, read on the I/O thread

  std::deque<std::pair<double, std::string>> delayed;
  std::string current;
  bool writing = false;
  std::array<char, 64 * 1024> read_buf{};
  net::LineFramer framer;
  std::atomic<std::uint64_t> malformed{0};
  unsigned short bound_port = 0;
};

TcpLink::TcpLink(Options opts, Receiver receiver) : impl_(std::make_unique<Impl>(std::move(opts), std::move(receiver))) {
  auto& im = *impl_;
  if (im.opts.role == Role::Listen) {
    const tcp::endpoint ep(asio::ip::make_address(im.opts.host), im.opts.port);
    im.acceptor.open(ep.protocol());
    im.acceptor.set_option(tcp::acceptor::reuse_address(true));
    im.acceptor.bind(ep);
    im.acceptor.listen(1);
    im.bound_port = im.acceptor.local_endpoint().port();
    im.acceptor.async_accept(im.socket, [&im](boost::system::error_code ec) {
      if (!ec) im.set_connected();
    });
  } else {
    im.bound_port = im.opts.port;
    tcp::resolver resolver(im.ctx);
    const auto endpoints = resolver.resolve(im.opts.host, std::to_string(im.opts.port));
    asio::connect(im.socket, endpoints);
    im.socket.set_option(tcp::no_delay(true));
    asio::post(im.ctx, [&im] { im.set_connected(); });
  }
  im.thread = std::thread([&im] { im.ctx.run(); });
}

TcpLink::~TcpLink() {
  auto& im = *impl_;
  asio::post(im.ctx, [&im] {
    boost::system::error_code ignored;
    im.delay_timer.cancel();
    im.acceptor.close(ignored);
    im.socket.shutdown(tcp::socket::shutdown_both, ignored);
    im.socket.close(ignored);
    im.work.reset();
  });
  if (im.thread.joinable()) im.thread.join();
}

unsigned short TcpLink::port() const { return impl_->bound_port; }

bool TcpLink::wait_connected(std::chrono::milliseconds timeout) {
  std::unique_lock lock(impl_->state_mutex);
  return impl_->state_cv.wait_for(lock, timeout, [this] { return impl_->connected; });
}

net::SendOutcome TcpLink::send(const Envelope& e) {
  auto& im = *impl_;
  const net::SendOutcome out = im.model.send(im.opts.outgoing, im.now());
  if (!out.delivered) return out;
  asio::post(im.ctx, [&im, at = out.deliver_at, line = net::encode_envelope(e)]() mutable {
    im.delayed.emplace_back(at, std::move(line));
    im.pump();
  });
  return out;
}

double TcpLink::now() const { return impl_->now(); }
net::LinkModel& TcpLink::model() { return impl_->model; }
std::uint64_t TcpLink::malformed() const { return impl_->malformed; }

}  // namespace teleop::io
