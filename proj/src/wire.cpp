#include "shallowrl/wire.hpp"

#include <arpa/inet.h>
#include <array>
#include <cerrno>
#include <csignal>
#include <cstring>
#include <fcntl.h>
#include <mutex>
#include <netdb.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include "binary_io.hpp"

namespace shallowrl {

namespace {

constexpr std::string_view kHelloMagic = "SAEPv001";
constexpr std::string_view kResetTag = "RSET";
constexpr std::string_view kStepTag = "STEP";

void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { std::signal(SIGPIPE, SIG_IGN); });
}

std::string errno_text() { return std::strerror(errno); }

}  // namespace

ByteStream::ByteStream(int read_fd, int write_fd, bool owns_fds, pid_t child)
    : read_fd_(read_fd), write_fd_(write_fd), owns_(owns_fds), child_(child) {
  ignore_sigpipe();
}

ByteStream::~ByteStream() { close_all(); }

ByteStream::ByteStream(ByteStream&& other) noexcept
    : read_fd_(std::exchange(other.read_fd_, -1)),
      write_fd_(std::exchange(other.write_fd_, -1)),
      owns_(std::exchange(other.owns_, false)),
      child_(std::exchange(other.child_, -1)) {}

ByteStream& ByteStream::operator=(ByteStream&& other) noexcept {
  if (this != &other) {
    close_all();
    read_fd_ = std::exchange(other.read_fd_, -1);
    write_fd_ = std::exchange(other.write_fd_, -1);
    owns_ = std::exchange(other.owns_, false);
    child_ = std::exchange(other.child_, -1);
  }
  return *this;
}

void ByteStream::close_all() noexcept {
  if (owns_) {
    if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
    if (read_fd_ >= 0) ::close(read_fd_);
  }
  read_fd_ = write_fd_ = -1;
  if (child_ > 0) {
    int status = 0;
    ::waitpid(child_, &status, 0);
    child_ = -1;
  }
}

bool ByteStream::read_exact_or_eof(std::span<std::uint8_t> out) {
  std::size_t got = 0;
  while (got < out.size()) {
    ssize_t n = ::read(read_fd_, out.data() + got, out.size() - got);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ProtocolError("read failed: " + errno_text());
    }
    if (n == 0) {
      if (got == 0) return false;
      throw ProtocolError("peer closed the stream mid-message");
    }
    got += static_cast<std::size_t>(n);
  }
  return true;
}

void ByteStream::read_exact(std::span<std::uint8_t> out) {
  if (!read_exact_or_eof(out)) throw ProtocolError("peer closed the stream");
}

void ByteStream::write_all(std::span<const std::uint8_t> data) {
  std::size_t sent = 0;
  while (sent < data.size()) {
    ssize_t n = ::write(write_fd_, data.data() + sent, data.size() - sent);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ProtocolError("write failed: " + errno_text());
    }
    sent += static_cast<std::size_t>(n);
  }
}

ByteStream ByteStream::connect_tcp(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* found = nullptr;
  const std::string service = std::to_string(port);
  if (int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &found); rc != 0)
    throw ProtocolError("cannot resolve " + host + ": " + ::gai_strerror(rc));
  int fd = -1;
  for (addrinfo* ai = found; ai != nullptr; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(found);
  if (fd < 0) throw ProtocolError("cannot connect to " + host + ":" + service);
  return ByteStream(fd, fd);
}

ByteStream ByteStream::spawn(const std::string& command) {
  int to_child[2];
  int from_child[2];
  if (::pipe(to_child) != 0) throw ProtocolError("pipe failed: " + errno_text());
  if (::pipe(from_child) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    throw ProtocolError("pipe failed: " + errno_text());
  }
  pid_t pid = ::fork();
  if (pid < 0) throw ProtocolError("fork failed: " + errno_text());
  if (pid == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::close(to_child[0]);
    ::close(to_child[1]);
    ::close(from_child[0]);
    ::close(from_child[1]);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);
  ::fcntl(to_child[1], F_SETFD, FD_CLOEXEC);
  ::fcntl(from_child[0], F_SETFD, FD_CLOEXEC);
  return ByteStream(from_child[0], to_child[1], true, pid);
}

ByteStream ByteStream::stdio() { return ByteStream(STDIN_FILENO, STDOUT_FILENO, false); }

std::pair<ByteStream, ByteStream> ByteStream::socket_pair() {
  int fds[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM, 0, fds) != 0) throw ProtocolError("socketpair failed: " + errno_text());
  return {ByteStream(fds[0], fds[0]), ByteStream(fds[1], fds[1])};
}

std::vector<std::uint8_t> encode_hello(const WireHello& hello) {
  detail::ByteWriter w;
  w.tag(kHelloMagic);
  w.u32(hello.width);
  w.u32(hello.height);
  w.u32(hello.full_action_count);
  w.u32(static_cast<std::uint32_t>(hello.minimal_actions.size()));
  w.bytes(hello.minimal_actions);
  return w.take();
}

std::vector<std::uint8_t> encode_frame_payload(const Frame& frame) {
  detail::ByteWriter w;
  w.u32(static_cast<std::uint32_t>(frame.size()));
  std::vector<std::uint8_t> raw(frame.pixels().begin(), frame.pixels().end());
  for (auto& b : raw) b = static_cast<std::uint8_t>(b << 1);
  w.bytes(raw);
  return w.take();
}

namespace {

template <std::size_t N>
std::array<std::uint8_t, N> read_array(ByteStream& s) {
  std::array<std::uint8_t, N> buf{};
  s.read_exact(buf);
  return buf;
}

std::uint32_t read_u32(ByteStream& s) {
  auto b = read_array<4>(s);
  return detail::ByteReader(b).u32("u32");
}

}  // namespace

WireEnvironment::WireEnvironment(ByteStream stream, std::string address)
    : stream_(std::move(stream)), address_(std::move(address)) {
  try {
    auto magic = read_array<8>(stream_);
    if (std::string_view(reinterpret_cast<const char*>(magic.data()), magic.size()) != kHelloMagic)
      throw ProtocolError("bad handshake magic");
    hello_.width = read_u32(stream_);
    hello_.height = read_u32(stream_);
    hello_.full_action_count = read_u32(stream_);
    const auto minimal = read_u32(stream_);
    if (hello_.width == 0 || hello_.height == 0 || hello_.width > 4096 || hello_.height > 4096)
      throw ProtocolError("implausible screen size in handshake");
    if (hello_.full_action_count == 0 || hello_.full_action_count > 256 || minimal == 0 ||
        minimal > hello_.full_action_count)
      throw ProtocolError("implausible action counts in handshake");
    hello_.minimal_actions.resize(minimal);
    stream_.read_exact(hello_.minimal_actions);
    for (auto a : hello_.minimal_actions)
      if (a >= hello_.full_action_count) throw ProtocolError("minimal action outside the full action set");
  } catch (const ProtocolError& e) {
    throw ProtocolError("handshake with " + address_ + " failed: " + e.what());
  }
  frame_ = Frame(static_cast<int>(hello_.width), static_cast<int>(hello_.height));
}

std::vector<int> WireEnvironment::minimal_actions() const {
  return {hello_.minimal_actions.begin(), hello_.minimal_actions.end()};
}

void WireEnvironment::read_frame() {
  const auto length = read_u32(stream_);
  if (length != hello_.width * hello_.height)
    throw ProtocolError("frame payload of " + std::to_string(length) + " bytes does not match the handshake");
  std::vector<std::uint8_t> raw(length);
  stream_.read_exact(raw);
  frame_ = Frame::from_raw(static_cast<int>(hello_.width), static_cast<int>(hello_.height), raw);
}

void WireEnvironment::do_reset(std::uint64_t seed) {
  detail::ByteWriter w;
  w.tag(kResetTag);
  w.u64(seed);
  stream_.write_all(w.buffer());
  read_frame();
  done_ = false;
}

StepOutcome WireEnvironment::do_step(int action) {
  detail::ByteWriter w;
  w.tag(kStepTag);
  w.u8(static_cast<std::uint8_t>(action));
  stream_.write_all(w.buffer());
  read_frame();
  auto tail = read_array<9>(stream_);
  detail::ByteReader r(tail);
  StepOutcome out;
  out.reward = r.f64("reward");
  const auto flag = r.u8("terminal flag");
  if (flag > 1) throw ProtocolError("terminal flag must be 0 or 1");
  out.terminal = flag == 1;
  done_ = out.terminal;
  return out;
}

std::unique_ptr<Environment> connect_wire_environment(std::string_view address) {
  const std::string addr(address);
  if (address.starts_with("exec:")) {
    return std::make_unique<WireEnvironment>(ByteStream::spawn(addr.substr(5)), addr);
  }
  if (address.starts_with("tcp:")) {
    const std::string rest = addr.substr(4);
    const auto colon = rest.rfind(':');
    if (colon == std::string::npos || colon == 0) throw std::invalid_argument("expected tcp:HOST:PORT, got " + addr);
    int port = 0;
    try {
      port = std::stoi(rest.substr(colon + 1));
    } catch (const std::exception&) {
      port = -1;
    }
    if (port <= 0 || port > 65535) throw std::invalid_argument("bad port in " + addr);
    try {
      return std::make_unique<WireEnvironment>(
          ByteStream::connect_tcp(rest.substr(0, colon), static_cast<std::uint16_t>(port)), addr);
    } catch (const ProtocolError& e) {
      throw ProtocolError(std::string(e.what()).find(addr) == std::string::npos ? addr + ": " + e.what() : e.what());
    }
  }
  throw std::invalid_argument("not a wire address: " + addr);
}

void serve_environment(Environment& env, ByteStream& stream) {
  const Frame& first = env.screen();
  WireHello hello;
  hello.width = static_cast<std::uint32_t>(first.width());
  hello.height = static_cast<std::uint32_t>(first.height());
  hello.full_action_count = static_cast<std::uint32_t>(env.full_action_count());
  for (int a : env.minimal_actions()) hello.minimal_actions.push_back(static_cast<std::uint8_t>(a));
  stream.write_all(encode_hello(hello));

  std::array<std::uint8_t, 4> tag{};
  while (stream.read_exact_or_eof(tag)) {
    const std::string_view t(reinterpret_cast<const char*>(tag.data()), tag.size());
    if (t == kResetTag) {
      auto seed_bytes = read_array<8>(stream);
      env.reset(detail::ByteReader(seed_bytes).u64("seed"));
      stream.write_all(encode_frame_payload(env.screen()));
    } else if (t == kStepTag) {
      auto action = read_array<1>(stream)[0];
      if (env.terminal()) throw ProtocolError("client stepped a terminal episode");
      if (action >= env.full_action_count()) throw ProtocolError("client sent an out-of-range action");
      auto outcome = env.step(action);
      detail::ByteWriter w;
      w.bytes(encode_frame_payload(env.screen()));
      w.f64(outcome.reward);
      w.u8(outcome.terminal ? 1 : 0);
      stream.write_all(w.buffer());
    } else {
      throw ProtocolError("unknown request tag");
    }
  }
}

void serve_environment_tcp(Environment& env, std::uint16_t port) {
  int listener = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listener < 0) throw ProtocolError("socket failed: " + errno_text());
  int yes = 1;
  ::setsockopt(listener, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(port);
  if (::bind(listener, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 || ::listen(listener, 1) != 0) {
    ::close(listener);
    throw ProtocolError("cannot listen on port " + std::to_string(port) + ": " + errno_text());
  }
  int fd = ::accept(listener, nullptr, nullptr);
  ::close(listener);
  if (fd < 0) throw ProtocolError("accept failed: " + errno_text());
  ByteStream stream(fd, fd);
  serve_environment(env, stream);
}

}  // namespace shallowrl
