#include "hrsal/sidecar.hpp"

#include <algorithm>
#include <bit>
#include <cerrno>
#include <cmath>
#include <csignal>
#include <cstring>
#include <mutex>
#include <regex>
#include <thread>

#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include "hrsal/errors.hpp"

namespace hrsal::sidecar {

namespace {

void put_le(std::uint8_t* dst, std::uint64_t value, int bytes) {
    for (int i = 0; i < bytes; ++i) dst[i] = static_cast<std::uint8_t>(value >> (8 * i));
}

std::uint64_t get_le(const std::uint8_t* src, int bytes) {
    std::uint64_t value = 0;
    for (int i = 0; i < bytes; ++i) value |= std::uint64_t{src[i]} << (8 * i);
    return value;
}

std::uint64_t expected_payload(std::uint32_t width, std::uint32_t height, std::uint8_t channels) {
    const std::uint64_t bytes_per_sample = channels == 3 ? 1 : 4;
    return std::uint64_t{width} * height * channels * bytes_per_sample;
}

// ---------------------------------------------------------------------------
// File-descriptor channels
// ---------------------------------------------------------------------------

using Clock = std::chrono::steady_clock;

int remaining_ms(Clock::time_point deadline) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
    return static_cast<int>(std::max<long long>(left, 0));
}

void set_nonblocking(int fd) {
    const int flags = fcntl(fd, F_GETFL, 0);
    fcntl(fd, F_SETFL, flags | O_NONBLOCK);
}

// Reads from `read_fd`, writes to `write_fd` (may be the same socket).
class FdChannel : public Channel {
public:
    FdChannel(int read_fd, int write_fd, std::string label, bool socket)
        : read_fd_(read_fd), write_fd_(write_fd), label_(std::move(label)), socket_(socket) {
        set_nonblocking(read_fd_);
        if (write_fd_ != read_fd_) set_nonblocking(write_fd_);
    }

    ~FdChannel() override { close_fds(); }

    void write_all(std::span<const std::uint8_t> bytes, std::chrono::milliseconds timeout) override {
        const auto deadline = Clock::now() + timeout;
        std::size_t done = 0;
        while (done < bytes.size()) {
            wait_for(write_fd_, POLLOUT, deadline, "write");
            const ssize_t n = socket_ ? ::send(write_fd_, bytes.data() + done, bytes.size() - done, MSG_NOSIGNAL)
                                      : ::write(write_fd_, bytes.data() + done, bytes.size() - done);
            if (n < 0) {
                if (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR) continue;
                throw PredictorError(label_, std::string("write failed: ") + std::strerror(errno));
            }
            done += static_cast<std::size_t>(n);
        }
    }

    void read_exact(std::span<std::uint8_t> bytes, std::chrono::milliseconds timeout) override {
        const auto deadline = Clock::now() + timeout;
        std::size_t done = 0;
        while (done < bytes.size()) {
            wait_for(read_fd_, POLLIN, deadline, "read");
            const ssize_t n = ::read(read_fd_, bytes.data() + done, bytes.size() - done);
            if (n < 0) {
                if (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR) continue;
                throw PredictorError(label_, std::string("read failed: ") + std::strerror(errno));
            }
            if (n == 0) throw PredictorError(label_, "adapter closed the stream");
            done += static_cast<std::size_t>(n);
        }
    }

protected:
    void close_fds() {
        if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
        if (read_fd_ >= 0) ::close(read_fd_);
        read_fd_ = write_fd_ = -1;
    }

private:
    void wait_for(int fd, short events, Clock::time_point deadline, const char* what) {
        for (;;) {
            pollfd pfd{fd, events, 0};
            const int rc = ::poll(&pfd, 1, remaining_ms(deadline));
            if (rc > 0) {
                // POLLHUP with pending data still reads; read() reports EOF afterwards
                if ((pfd.revents & (events | POLLHUP | POLLERR | POLLNVAL)) != 0) return;
                continue;
            }
            if (rc == 0) throw PredictorError(label_, std::string(what) + " timed out");
            if (errno != EINTR) throw PredictorError(label_, std::string("poll failed: ") + std::strerror(errno));
        }
    }

    int read_fd_;
    int write_fd_;
    std::string label_;
    bool socket_;
};

class ChildProcessChannel : public FdChannel {
public:
    ChildProcessChannel(pid_t pid, int read_fd, int write_fd, std::string label)
        : FdChannel(read_fd, write_fd, std::move(label), false), pid_(pid) {}

    ~ChildProcessChannel() override {
        close_fds();  // EOF on the adapter's stdin asks it to exit
        for (int i = 0; i < 100; ++i) {
            if (::waitpid(pid_, nullptr, WNOHANG) != 0) return;
            std::this_thread::sleep_for(std::chrono::milliseconds(10));
        }
        ::kill(-pid_, SIGKILL);  // the whole group, in case the shell forked
        ::waitpid(pid_, nullptr, 0);
    }

private:
    pid_t pid_;
};

std::unique_ptr<Channel> spawn_child(const Endpoint& endpoint) {
    // Writes to a dead child must surface as EPIPE, not kill the process.
    static std::once_flag ignore_sigpipe;
    std::call_once(ignore_sigpipe, [] { std::signal(SIGPIPE, SIG_IGN); });

    int to_child[2];
    int from_child[2];
    if (::pipe2(to_child, O_CLOEXEC) != 0) {
        throw PredictorError(endpoint.describe(), "pipe failed");
    }
    if (::pipe2(from_child, O_CLOEXEC) != 0) {
        ::close(to_child[0]);
        ::close(to_child[1]);
        throw PredictorError(endpoint.describe(), "pipe failed");
    }
    const std::string script = "exec " + endpoint.command;
    const pid_t pid = ::fork();
    if (pid < 0) {
        for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]}) ::close(fd);
        throw PredictorError(endpoint.describe(), "fork failed");
    }
    if (pid == 0) {
        ::setpgid(0, 0);
        ::dup2(to_child[0], STDIN_FILENO);
        ::dup2(from_child[1], STDOUT_FILENO);
        ::execl("/bin/sh", "sh", "-c", script.c_str(), static_cast<char*>(nullptr));
        ::_exit(127);
    }
    ::setpgid(pid, pid);
    ::close(to_child[0]);
    ::close(from_child[1]);
    return std::make_unique<ChildProcessChannel>(pid, from_child[0], to_child[1], endpoint.describe());
}

std::unique_ptr<Channel> connect_socket(const Endpoint& endpoint) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* found = nullptr;
    const std::string port = std::to_string(endpoint.port);
    if (::getaddrinfo(endpoint.host.c_str(), port.c_str(), &hints, &found) != 0 || found == nullptr) {
        throw PredictorError(endpoint.describe(), "cannot resolve host");
    }
    int fd = -1;
    for (addrinfo* ai = found; ai != nullptr; ai = ai->ai_next) {
        fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
        if (fd < 0) continue;
        if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
        ::close(fd);
        fd = -1;
    }
    ::freeaddrinfo(found);
    if (fd < 0) throw PredictorError(endpoint.describe(), "connection refused");
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    return std::make_unique<FdChannel>(fd, fd, endpoint.describe(), true);
}

}  // namespace

// ---------------------------------------------------------------------------
// Framing
// ---------------------------------------------------------------------------

std::array<std::uint8_t, kHeaderSize> encode_header(const FrameHeader& header) {
    std::array<std::uint8_t, kHeaderSize> bytes{};
    std::copy(kMagic.begin(), kMagic.end(), bytes.begin());
    bytes[4] = kVersion;
    bytes[5] = static_cast<std::uint8_t>(header.role);
    put_le(&bytes[6], header.width, 4);
    put_le(&bytes[10], header.height, 4);
    bytes[14] = header.channels;
    put_le(&bytes[15], header.payload_length, 8);
    return bytes;
}

FrameHeader parse_header(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kHeaderSize) throw FrameError("short frame header");
    if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) throw FrameError("bad magic");
    if (bytes[4] != kVersion) throw FrameError("unsupported version " + std::to_string(bytes[4]));
    FrameHeader header;
    if (bytes[5] != 1 && bytes[5] != 2) throw FrameError("unknown role " + std::to_string(bytes[5]));
    header.role = static_cast<Role>(bytes[5]);
    header.width = static_cast<std::uint32_t>(get_le(&bytes[6], 4));
    header.height = static_cast<std::uint32_t>(get_le(&bytes[10], 4));
    header.channels = bytes[14];
    header.payload_length = get_le(&bytes[15], 8);
    if (header.channels != 1 && header.channels != 3) {
        throw FrameError("unsupported channel count " + std::to_string(header.channels));
    }
    if (header.width == 0 || header.height == 0 || header.width > kMaxSide || header.height > kMaxSide) {
        throw FrameError("invalid frame dimensions");
    }
    if (header.payload_length != expected_payload(header.width, header.height, header.channels)) {
        throw FrameError("payload length does not match dimensions");
    }
    return header;
}

std::vector<std::uint8_t> encode_image_frame(Role role, const RasterImage& image) {
    const FrameHeader header{role, static_cast<std::uint32_t>(image.width()),
                             static_cast<std::uint32_t>(image.height()), 3, image.data().size()};
    const auto head = encode_header(header);
    std::vector<std::uint8_t> frame(kHeaderSize + header.payload_length);
    std::copy(head.begin(), head.end(), frame.begin());
    std::copy(image.data().begin(), image.data().end(), frame.begin() + kHeaderSize);
    return frame;
}

std::vector<std::uint8_t> encode_map_frame(Role role, const SaliencyMap& map) {
    const FrameHeader header{role, static_cast<std::uint32_t>(map.width()), static_cast<std::uint32_t>(map.height()),
                             1, map.values().size() * 4};
    const auto head = encode_header(header);
    std::vector<std::uint8_t> frame(kHeaderSize + header.payload_length);
    std::copy(head.begin(), head.end(), frame.begin());
    std::uint8_t* out = frame.data() + kHeaderSize;
    for (double v : map.values()) {
        put_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)), 4);
        out += 4;
    }
    return frame;
}

RasterImage decode_image_payload(const FrameHeader& header, std::span<const std::uint8_t> payload) {
    if (header.channels != 3) throw FrameError("expected an RGB frame");
    if (payload.size() != header.payload_length) throw FrameError("payload size mismatch");
    return RasterImage(static_cast<int>(header.width), static_cast<int>(header.height),
                       std::vector<std::uint8_t>(payload.begin(), payload.end()));
}

SaliencyMap decode_map_payload(const FrameHeader& header, std::span<const std::uint8_t> payload) {
    if (header.channels != 1) throw FrameError("expected a map frame");
    if (payload.size() != header.payload_length) throw FrameError("payload size mismatch");
    std::vector<double> values(payload.size() / 4);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const float v = std::bit_cast<float>(static_cast<std::uint32_t>(get_le(&payload[4 * i], 4)));
        if (!std::isfinite(v) || v < 0.0f || v > 1.0f) throw FrameError("map value outside [0,1]");
        values[i] = v;
    }
    return SaliencyMap(static_cast<int>(header.width), static_cast<int>(header.height), std::move(values));
}

// ---------------------------------------------------------------------------
// Endpoints and client
// ---------------------------------------------------------------------------

Endpoint Endpoint::parse(const std::string& text) {
    if (text.find_first_not_of(" \t") == std::string::npos) {
        throw std::invalid_argument("sidecar endpoint is empty");
    }
    static const std::regex host_port(R"(^([A-Za-z0-9.\-]+):([0-9]{1,5})$)");
    std::smatch m;
    Endpoint endpoint;
    if (std::regex_match(text, m, host_port)) {
        const int port = std::stoi(m[2].str());
        if (port < 1 || port > 65535) throw std::invalid_argument("sidecar port out of range: " + text);
        endpoint.kind = Kind::Socket;
        endpoint.host = m[1].str();
        endpoint.port = port;
    } else {
        endpoint.kind = Kind::Command;
        endpoint.command = text;
    }
    return endpoint;
}

std::string Endpoint::describe() const {
    return kind == Kind::Socket ? "sidecar " + host + ":" + std::to_string(port) : "sidecar `" + command + "`";
}

std::unique_ptr<Channel> open_channel(const Endpoint& endpoint) {
    return endpoint.kind == Endpoint::Kind::Socket ? connect_socket(endpoint) : spawn_child(endpoint);
}

SidecarClient::SidecarClient(Endpoint endpoint, std::chrono::milliseconds timeout)
    : endpoint_(std::move(endpoint)), label_(endpoint_.describe()), timeout_(timeout) {}

SidecarClient::SidecarClient(std::unique_ptr<Channel> channel, std::string label, std::chrono::milliseconds timeout)
    : label_(std::move(label)), timeout_(timeout), channel_(std::move(channel)) {}

SidecarClient::~SidecarClient() = default;

void SidecarClient::connect() {
    if (channel_) return;
    if (endpoint_.command.empty() && endpoint_.host.empty()) throw PredictorError(label_, "no endpoint");
    channel_ = open_channel(endpoint_);
}

SaliencyMap SidecarClient::coarse(const RasterImage& image) {
    const std::vector<std::vector<std::uint8_t>> frames{encode_image_frame(Role::Coarse, image)};
    return exchange(Role::Coarse, frames, image.width(), image.height());
}

SaliencyMap SidecarClient::refine(const RasterImage& image, const SaliencyMap& guidance) {
    if (guidance.width() != image.width() || guidance.height() != image.height()) {
        throw std::invalid_argument("refine: guidance dimensions differ from the image patch");
    }
    const std::vector<std::vector<std::uint8_t>> frames{encode_image_frame(Role::Refine, image),
                                                        encode_map_frame(Role::Refine, guidance)};
    return exchange(Role::Refine, frames, image.width(), image.height());
}

SaliencyMap SidecarClient::exchange(Role role, std::span<const std::vector<std::uint8_t>> frames, int width,
                                    int height) {
    if (broken_) throw PredictorError(label_, "connection previously failed");
    try {
        connect();
        for (const auto& frame : frames) channel_->write_all(frame, timeout_);
        std::array<std::uint8_t, kHeaderSize> head{};
        channel_->read_exact(head, timeout_);
        const FrameHeader header = parse_header(head);
        if (header.channels != 1) throw FrameError("response is not a map frame");
        if (header.role != role) throw FrameError("response role differs from request");
        if (header.width != static_cast<std::uint32_t>(width) || header.height != static_cast<std::uint32_t>(height)) {
            throw FrameError("response dimensions " + std::to_string(header.width) + "x" +
                             std::to_string(header.height) + " differ from request");
        }
        std::vector<std::uint8_t> payload(header.payload_length);
        channel_->read_exact(payload, timeout_);
        return decode_map_payload(header, payload);
    } catch (const FrameError& e) {
        broken_ = true;
        channel_.reset();
        throw PredictorError(label_, std::string("malformed frame: ") + e.what());
    } catch (const PredictorError&) {
        broken_ = true;
        channel_.reset();
        throw;
    }
}

}  // namespace hrsal::sidecar
