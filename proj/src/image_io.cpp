#include "hrsal/image_io.hpp"

#include <array>
#include <cctype>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "hrsal/errors.hpp"

namespace hrsal {

namespace {

constexpr long long kMaxPixels = 1LL << 28;

std::string lower_extension(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return ext;
}

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& why) {
    throw IoError(path.string() + ": " + why);
}

std::vector<char> read_all(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open for reading");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void check_size(const std::filesystem::path& path, long long width, long long height) {
    if (width < 1 || height < 1 || width * height > kMaxPixels) {
        fail(path, "unsupported dimensions " + std::to_string(width) + "x" + std::to_string(height));
    }
}

// Binary PGM (P5, maxval <= 255). Returns the sample plane.
struct GrayPlane {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> samples;
};

struct PgmHeader {
    long long width = 0;
    long long height = 0;
    long long maxval = 0;
    std::size_t data_offset = 0;
};

std::optional<PgmHeader> parse_pgm_header(const std::vector<char>& bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') return std::nullopt;
    std::size_t pos = 2;
    std::array<long long, 3> fields{};
    for (long long& field : fields) {
        while (pos < bytes.size()) {
            const auto c = static_cast<unsigned char>(bytes[pos]);
            if (c == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(c)) {
                ++pos;
            } else {
                break;
            }
        }
        if (pos >= bytes.size() || !std::isdigit(static_cast<unsigned char>(bytes[pos]))) return std::nullopt;
        field = 0;
        while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
            field = field * 10 + (bytes[pos] - '0');
            if (field > (1LL << 31)) return std::nullopt;
            ++pos;
        }
    }
    // exactly one whitespace byte separates the header from the raster
    if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) return std::nullopt;
    return PgmHeader{fields[0], fields[1], fields[2], pos + 1};
}

GrayPlane read_pgm(const std::filesystem::path& path) {
    const std::vector<char> bytes = read_all(path);
    const auto header = parse_pgm_header(bytes);
    if (!header) fail(path, "malformed PGM header");
    check_size(path, header->width, header->height);
    if (header->maxval < 1 || header->maxval > 255) fail(path, "only 8-bit PGM is supported");
    const auto count = static_cast<std::size_t>(header->width * header->height);
    if (bytes.size() - header->data_offset < count) fail(path, "truncated PGM raster");
    GrayPlane plane{static_cast<int>(header->width), static_cast<int>(header->height), {}};
    plane.samples.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        auto v = static_cast<unsigned>(static_cast<unsigned char>(bytes[header->data_offset + i]));
        if (header->maxval != 255) v = (v * 255 + header->maxval / 2) / header->maxval;
        plane.samples[i] = static_cast<std::uint8_t>(std::min(v, 255u));
    }
    return plane;
}

void write_pgm(const std::filesystem::path& path, int width, int height, const std::vector<std::uint8_t>& samples) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(path, "cannot open for writing");
    out << "P5\n" << width << ' ' << height << "\n255\n";
    out.write(reinterpret_cast<const char*>(samples.data()), static_cast<std::streamsize>(samples.size()));
    if (!out) fail(path, "write failed");
}

cv::Mat decode(const std::filesystem::path& path, int flags) {
    if (!std::filesystem::is_regular_file(path)) fail(path, "no such file");
    const std::vector<char> bytes = read_all(path);
    if (bytes.empty()) fail(path, "empty file");
    cv::Mat image;
    try {
        image = cv::imdecode(cv::Mat(1, static_cast<int>(bytes.size()), CV_8UC1, const_cast<char*>(bytes.data())),
                             flags);
    } catch (const cv::Exception& e) {
        fail(path, std::string("decode error: ") + e.what());
    }
    if (image.empty()) fail(path, "unsupported or corrupt image");
    check_size(path, image.cols, image.rows);
    return image;
}

void encode(const std::filesystem::path& path, const cv::Mat& image) {
    std::vector<uchar> buffer;
    try {
        if (!cv::imencode(".png", image, buffer)) fail(path, "PNG encoding failed");
    } catch (const cv::Exception& e) {
        fail(path, std::string("encode error: ") + e.what());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(path, "cannot open for writing");
    out.write(reinterpret_cast<const char*>(buffer.data()), static_cast<std::streamsize>(buffer.size()));
    if (!out) fail(path, "write failed");
}

GrayPlane read_gray(const std::filesystem::path& path) {
    if (lower_extension(path) == ".pgm") return read_pgm(path);
    const cv::Mat gray = decode(path, cv::IMREAD_GRAYSCALE);
    GrayPlane plane{gray.cols, gray.rows, {}};
    plane.samples.reserve(static_cast<std::size_t>(gray.cols) * gray.rows);
    for (int y = 0; y < gray.rows; ++y) {
        const auto* row = gray.ptr<std::uint8_t>(y);
        plane.samples.insert(plane.samples.end(), row, row + gray.cols);
    }
    return plane;
}

void write_gray(const std::filesystem::path& path, int width, int height, std::vector<std::uint8_t> samples) {
    if (lower_extension(path) == ".pgm") {
        write_pgm(path, width, height, samples);
        return;
    }
    encode(path, cv::Mat(height, width, CV_8UC1, samples.data()));
}

std::uint32_t be32(const unsigned char* p) {
    return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) | p[3];
}

std::optional<ImageSize> probe_jpeg(std::ifstream& in) {
    // walk markers until a start-of-frame segment
    in.seekg(2);
    for (;;) {
        int c = in.get();
        while (c == 0xFF) c = in.get();
        if (!in) return std::nullopt;
        const int marker = c;
        unsigned char len_bytes[2];
        if (!in.read(reinterpret_cast<char*>(len_bytes), 2)) return std::nullopt;
        const int length = (len_bytes[0] << 8) | len_bytes[1];
        const bool sof = marker >= 0xC0 && marker <= 0xCF && marker != 0xC4 && marker != 0xC8 && marker != 0xCC;
        if (sof) {
            unsigned char frame[5];
            if (!in.read(reinterpret_cast<char*>(frame), 5)) return std::nullopt;
            return ImageSize{(frame[3] << 8) | frame[4], (frame[1] << 8) | frame[2]};
        }
        if (length < 2) return std::nullopt;
        in.seekg(length - 2, std::ios::cur);
    }
}

}  // namespace

RasterImage load_image(const std::filesystem::path& path) {
    if (lower_extension(path) == ".pgm") {
        const GrayPlane plane = read_pgm(path);
        std::vector<std::uint8_t> rgb;
        rgb.reserve(plane.samples.size() * 3);
        for (std::uint8_t v : plane.samples) rgb.insert(rgb.end(), {v, v, v});
        return RasterImage(plane.width, plane.height, std::move(rgb));
    }
    const cv::Mat bgr = decode(path, cv::IMREAD_COLOR);
    RasterImage image(bgr.cols, bgr.rows);
    for (int y = 0; y < bgr.rows; ++y) {
        const auto* row = bgr.ptr<cv::Vec3b>(y);
        for (int x = 0; x < bgr.cols; ++x) {
            std::uint8_t* px = image.pixel(x, y);
            px[0] = row[x][2];
            px[1] = row[x][1];
            px[2] = row[x][0];
        }
    }
    return image;
}

SaliencyMap load_map(const std::filesystem::path& path) {
    const GrayPlane plane = read_gray(path);
    return from_bytes(plane.width, plane.height, plane.samples);
}

BinaryMask load_mask(const std::filesystem::path& path) {
    GrayPlane plane = read_gray(path);
    for (std::uint8_t& v : plane.samples) v = v > 127 ? 1 : 0;
    return BinaryMask(plane.width, plane.height, std::move(plane.samples));
}

void save_image(const std::filesystem::path& path, const RasterImage& image) {
    cv::Mat bgr(image.height(), image.width(), CV_8UC3);
    for (int y = 0; y < image.height(); ++y) {
        auto* row = bgr.ptr<cv::Vec3b>(y);
        for (int x = 0; x < image.width(); ++x) {
            const std::uint8_t* px = image.pixel(x, y);
            row[x] = cv::Vec3b(px[2], px[1], px[0]);
        }
    }
    encode(path, bgr);
}

void save_map(const std::filesystem::path& path, const SaliencyMap& map) {
    write_gray(path, map.width(), map.height(), byte_scale(map));
}

void save_mask(const std::filesystem::path& path, const BinaryMask& mask) {
    std::vector<std::uint8_t> samples(mask.values().begin(), mask.values().end());
    for (std::uint8_t& v : samples) v = v ? 255 : 0;
    write_gray(path, mask.width(), mask.height(), std::move(samples));
}

std::optional<ImageSize> probe_dimensions(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    unsigned char head[24] = {};
    in.read(reinterpret_cast<char*>(head), sizeof head);
    const auto got = in.gcount();
    in.clear();
    static constexpr unsigned char kPngSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
    if (got >= 24 && std::equal(std::begin(kPngSig), std::end(kPngSig), head)) {
        return ImageSize{static_cast<int>(be32(head + 16)), static_cast<int>(be32(head + 20))};
    }
    if (got >= 2 && head[0] == 0xFF && head[1] == 0xD8) return probe_jpeg(in);
    if (got >= 2 && head[0] == 'P' && head[1] == '5') {
        in.seekg(0);
        std::vector<char> bytes(256);
        in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        bytes.resize(static_cast<std::size_t>(in.gcount()));
        if (const auto header = parse_pgm_header(bytes)) {
            return ImageSize{static_cast<int>(header->width), static_cast<int>(header->height)};
        }
    }
    return std::nullopt;
}

}  // namespace hrsal
