#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gsik/gait.hpp"
#include "gsik/ik_controller.hpp"
#include "gsik/wire.hpp"

namespace gsik {

/// Protocol state for one connected client: an IkSession plus gait and
/// configuration. Transport-agnostic; the server feeds it decoded messages
/// and timer ticks and ships back whatever it returns.
class ServiceSession {
 public:
  explicit ServiceSession(std::shared_ptr<const Skeleton> skeleton);

  /// Messages sent once when the client connects.
  std::vector<wire::ServerMessage> greeting() const;

  std::vector<wire::ServerMessage> handle(const wire::ClientMessage& message);

  /// Parses `text` first; malformed input yields a single ErrorReply and
  /// leaves the session unchanged.
  std::vector<wire::ServerMessage> handle_text(std::string_view text);

  /// Periodic update. Advances the gait when it is running, otherwise keeps
  /// solving while the pose is still settling after a target change.
  std::vector<wire::ServerMessage> tick(double dt);

  bool gait_active() const { return gait_.has_value(); }
  bool settling() const { return settle_frames_ > 0; }
  const IkSession& session() const { return session_; }
  const IkConfig& config() const { return config_; }

  wire::PoseUpdate pose_update() const;

 private:
  std::vector<wire::ServerMessage> solve_and_report();
  std::vector<wire::ServerMessage> on(const wire::SetTarget& m);
  std::vector<wire::ServerMessage> on(const wire::SetConfig& m);
  std::vector<wire::ServerMessage> on(const wire::LoadSkeleton& m);
  std::vector<wire::ServerMessage> on(const wire::StartGait& m);
  std::vector<wire::ServerMessage> on(const wire::StopGait& m);
  std::vector<wire::ServerMessage> on(const wire::RebaseRoot& m);
  void pin_effectors();
  void adopt_display_order();

  IkSession session_;
  // Joint names in the order PoseUpdate reports them; fixed across gait
  // root swaps so clients can index angles without re-reading topology.
  std::vector<std::string> display_order_;
  IkConfig config_;
  std::optional<GaitState> gait_;
  int settle_frames_ = 0;
};

struct ServerOptions {
  std::string address = "0.0.0.0";
  /// 0 picks an ephemeral port.
  unsigned short port = 8080;
  /// Directory served at the HTTP root; empty disables static files.
  std::string static_dir;
  double tick_hz = 60.0;
  int threads = 2;
  /// Stop on SIGINT / SIGTERM.
  bool handle_signals = false;
};

/// WebSocket + static-file server. One ServiceSession per connection.
class Server {
 public:
  Server(std::shared_ptr<const Skeleton> skeleton, ServerOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and starts the worker threads; returns once listening.
  void start();
  unsigned short port() const;
  /// Timer ticks skipped because a session fell behind schedule.
  std::uint64_t dropped_ticks() const;
  /// Blocks until stop() is called from another thread or a signal handler.
  void wait();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace gsik
