/**
 * @file sidecar.hpp
 * @brief Binary frame protocol and transports for external predictor processes.
 *
 * Frame layout, little-endian, 23-byte header followed by the payload:
 *
 *     offset  size  field
 *          0     4  magic "HSAL"
 *          4     1  version (1)
 *          5     1  role (1 = coarse, 2 = refine)
 *          6     4  width
 *         10     4  height
 *         14     1  channels (3 = RGB8 request, 1 = float32 map)
 *         15     8  payload length in bytes
 *         23     -  row-major payload
 *
 * A coarse request is one RGB frame; a refine request is an RGB frame
 * followed by a guidance map frame. Every response is a single map frame
 * with the request's width and height. The adapter signals errors by closing
 * the stream.
 */
#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hrsal/image.hpp"

namespace hrsal::sidecar {

inline constexpr std::array<std::uint8_t, 4> kMagic = {'H', 'S', 'A', 'L'};
inline constexpr std::uint8_t kVersion = 1;
inline constexpr std::size_t kHeaderSize = 23;
inline constexpr std::uint32_t kMaxSide = 1u << 16;

enum class Role : std::uint8_t { Coarse = 1, Refine = 2 };

/// Malformed frame bytes.
class FrameError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct FrameHeader {
    Role role = Role::Coarse;
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::uint8_t channels = 0;
    std::uint64_t payload_length = 0;

    bool operator==(const FrameHeader&) const = default;
};

std::array<std::uint8_t, kHeaderSize> encode_header(const FrameHeader& header);
/// Validates magic, version, role, channels, and that the payload length
/// matches width * height * (3 or 4).
FrameHeader parse_header(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_image_frame(Role role, const RasterImage& image);
std::vector<std::uint8_t> encode_map_frame(Role role, const SaliencyMap& map);

RasterImage decode_image_payload(const FrameHeader& header, std::span<const std::uint8_t> payload);
/// Rejects values that are not finite or fall outside [0, 1].
SaliencyMap decode_map_payload(const FrameHeader& header, std::span<const std::uint8_t> payload);

/// Where an adapter lives: a shell command spawned as a child process (stdio
/// transport) or a local TCP socket.
struct Endpoint {
    enum class Kind { Command, Socket };

    Kind kind = Kind::Command;
    std::string command;
    std::string host;
    int port = 0;

    /// "HOST:PORT" (host of [A-Za-z0-9.-], numeric port) selects a socket,
    /// anything else is a command line. Throws std::invalid_argument when empty.
    static Endpoint parse(const std::string& text);
    std::string describe() const;
};

/// Bidirectional byte stream with deadline-bounded blocking operations.
class Channel {
public:
    virtual ~Channel() = default;
    virtual void write_all(std::span<const std::uint8_t> bytes, std::chrono::milliseconds timeout) = 0;
    virtual void read_exact(std::span<std::uint8_t> bytes, std::chrono::milliseconds timeout) = 0;
};

/// Opens the transport described by `endpoint`. Throws PredictorError.
std::unique_ptr<Channel> open_channel(const Endpoint& endpoint);

/// One connection to an adapter. Requests are strictly sequential; any
/// failure closes the connection and later calls fail fast.
class SidecarClient {
public:
    explicit SidecarClient(Endpoint endpoint, std::chrono::milliseconds timeout = std::chrono::seconds(30));
    /// Takes an already-open channel (tests, custom transports).
    SidecarClient(std::unique_ptr<Channel> channel, std::string label,
                  std::chrono::milliseconds timeout = std::chrono::seconds(30));
    ~SidecarClient();
    SidecarClient(const SidecarClient&) = delete;
    SidecarClient& operator=(const SidecarClient&) = delete;

    SaliencyMap coarse(const RasterImage& image);
    SaliencyMap refine(const RasterImage& image, const SaliencyMap& guidance);

    const std::string& label() const { return label_; }

private:
    SaliencyMap exchange(Role role, std::span<const std::vector<std::uint8_t>> frames, int width, int height);
    void connect();

    Endpoint endpoint_;
    std::string label_;
    std::chrono::milliseconds timeout_;
    std::unique_ptr<Channel> channel_;
    bool broken_ = false;
};

}  // namespace hrsal::sidecar
