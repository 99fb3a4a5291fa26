#pragma once

// Emulator wire protocol, version 1. All integers little-endian.
//
//   server hello : "SAEPv001" u32 width, u32 height, u32 full action count,
//                  u32 minimal action count, minimal actions as u8
//   "RSET" u64 seed   -> frame
//   "STEP" u8 action  -> frame, f64 reward, u8 terminal
//   frame        : u32 length, then that many raw palette bytes (row-major)
//
// Raw bytes carry the palette index in their upper seven bits; the client
// halves them.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <sys/types.h>
#include <utility>
#include <vector>

#include "shallowrl/env.hpp"
#include "shallowrl/errors.hpp"

namespace shallowrl {

/// Owning duplex byte stream over file descriptors.
class ByteStream {
 public:
  ByteStream(int read_fd, int write_fd, bool owns_fds = true, pid_t child = -1);
  ~ByteStream();
  ByteStream(ByteStream&& other) noexcept;
  ByteStream& operator=(ByteStream&& other) noexcept;
  ByteStream(const ByteStream&) = delete;
  ByteStream& operator=(const ByteStream&) = delete;

  void read_exact(std::span<std::uint8_t> out);
  /// Like read_exact, but returns false on a clean end of stream before the first byte.
  bool read_exact_or_eof(std::span<std::uint8_t> out);
  void write_all(std::span<const std::uint8_t> data);

  /// Connects to HOST:PORT.
  static ByteStream connect_tcp(const std::string& host, std::uint16_t port);
  /// Runs a shell command and talks to its stdin/stdout.
  static ByteStream spawn(const std::string& command);
  /// This process's stdin/stdout, not closed on destruction.
  static ByteStream stdio();
  static std::pair<ByteStream, ByteStream> socket_pair();

 private:
  void close_all() noexcept;

  int read_fd_ = -1;
  int write_fd_ = -1;
  bool owns_ = false;
  pid_t child_ = -1;
};

struct WireHello {
  std::uint32_t width = kScreenWidth;
  std::uint32_t height = kScreenHeight;
  std::uint32_t full_action_count = kFullActionCount;
  std::vector<std::uint8_t> minimal_actions;
};

std::vector<std::uint8_t> encode_hello(const WireHello& hello);
std::vector<std::uint8_t> encode_frame_payload(const Frame& frame);

/// Environment backed by a remote emulator.
class WireEnvironment final : public Environment {
 public:
  WireEnvironment(ByteStream stream, std::string address);

  const WireHello& hello() const noexcept { return hello_; }

  const Frame& screen() override { return frame_; }
  bool terminal() const override { return done_; }
  int full_action_count() const override { return static_cast<int>(hello_.full_action_count); }
  std::vector<int> minimal_actions() const override;
  std::string name() const override { return address_; }

 private:
  void do_reset(std::uint64_t seed) override;
  StepOutcome do_step(int action) override;
  void read_frame();

  ByteStream stream_;
  std::string address_;
  WireHello hello_;
  Frame frame_;
  bool done_ = true;
};

/// Opens tcp:HOST:PORT or exec:COMMAND and completes the handshake.
std::unique_ptr<Environment> connect_wire_environment(std::string_view address);

/// Serves env over the stream until the client closes it.
void serve_environment(Environment& env, ByteStream& stream);

/// Listens on port, serves one client, and returns when it disconnects.
void serve_environment_tcp(Environment& env, std::uint16_t port);

}  // namespace shallowrl
