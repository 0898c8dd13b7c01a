#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "heatdist/diffuse.hpp"
#include "heatdist/error.hpp"
#include "heatdist/graph.hpp"
#include "heatdist/random.hpp"

namespace heatdist {

// --- IDX files ---------------------------------------------------------------------

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

enum class IdxErrorKind { io, bad_magic, truncated, dimension_mismatch };

inline const char* to_string(IdxErrorKind k) {
    switch (k) {
        case IdxErrorKind::io: return "I/O error";
        case IdxErrorKind::bad_magic: return "bad magic number";
        case IdxErrorKind::truncated: return "truncated payload";
        case IdxErrorKind::dimension_mismatch: return "dimension mismatch";
    }
    return "IDX error";
}

class IdxError : public ParseError {
public:
    IdxError(IdxErrorKind kind, std::size_t offset, const std::string& detail)
        : ParseError(std::string("IDX ") + to_string(kind) + " at byte " + std::to_string(offset) + ": " + detail),
          kind_(kind), offset_(offset) {}

    IdxErrorKind kind() const noexcept { return kind_; }
    std::size_t offset() const noexcept { return offset_; }

private:
    IdxErrorKind kind_;
    std::size_t offset_;
};

/// Grey-scale images with intensities in [0, 1], stored row-major per image.
struct ImageSet {
    std::size_t count = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> pixels;  ///< count * rows * cols
    std::optional<std::vector<int>> labels;

    std::size_t pixels_per_image() const noexcept { return rows * cols; }
};

namespace detail {

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::uint32_t u32(const char* field) {
        need(4, field);
        std::uint32_t v = 0;
        for (int k = 0; k < 4; ++k) v = (v << 8) | bytes_[pos_++];
        return v;
    }
    std::span<const std::uint8_t> take(std::size_t count, const char* field) {
        need(count, field);
        auto s = bytes_.subspan(pos_, count);
        pos_ += count;
        return s;
    }
    std::size_t position() const noexcept { return pos_; }
    std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

private:
    void need(std::size_t count, const char* field) const {
        if (bytes_.size() - pos_ < count)
            throw IdxError(IdxErrorKind::truncated, pos_,
                           std::string(field) + " needs " + std::to_string(count) + " bytes, " +
                               std::to_string(bytes_.size() - pos_) + " left");
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

inline void expect_end(const ByteReader& in) {
    if (in.remaining() != 0)
        throw IdxError(IdxErrorKind::dimension_mismatch, in.position(),
                       std::to_string(in.remaining()) + " trailing bytes beyond the declared dimensions");
}

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IdxError(IdxErrorKind::io, 0, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

inline void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IdxError(IdxErrorKind::io, 0, "cannot write " + path.string());
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IdxError(IdxErrorKind::io, 0, "write failed for " + path.string());
}

}  // namespace detail

/// Big-endian IDX image file: magic 0x00000803, count, rows, cols, then bytes.
inline ImageSet parse_idx_images(std::span<const std::uint8_t> bytes) {
    detail::ByteReader in(bytes);
    const std::uint32_t magic = in.u32("magic");
    if (magic != kIdxImageMagic) throw IdxError(IdxErrorKind::bad_magic, 0, "expected 0x00000803 for images");
    ImageSet set;
    set.count = in.u32("image count");
    set.rows = in.u32("row count");
    set.cols = in.u32("column count");
    const std::uint64_t per_image = std::uint64_t{set.rows} * set.cols;
    const bool fits = per_image == 0 || set.count <= in.remaining() / per_image;
    const std::uint64_t total = fits ? per_image * set.count : 0;
    if (!fits)
        throw IdxError(IdxErrorKind::truncated, in.position(),
                       "pixel payload shorter than " + std::to_string(set.count) + " x " + std::to_string(set.rows) +
                           " x " + std::to_string(set.cols) + " bytes");
    const auto payload = in.take(static_cast<std::size_t>(total), "pixel payload");
    detail::expect_end(in);
    set.pixels.reserve(payload.size());
    for (std::uint8_t b : payload) set.pixels.push_back(static_cast<double>(b) / 255.0);
    return set;
}

/// Big-endian IDX label file: magic 0x00000801, count, then one byte per label.
inline std::vector<int> parse_idx_labels(std::span<const std::uint8_t> bytes) {
    detail::ByteReader in(bytes);
    const std::uint32_t magic = in.u32("magic");
    if (magic != kIdxLabelMagic) throw IdxError(IdxErrorKind::bad_magic, 0, "expected 0x00000801 for labels");
    const std::uint32_t count = in.u32("label count");
    const auto payload = in.take(count, "label payload");
    detail::expect_end(in);
    return {payload.begin(), payload.end()};
}

inline ImageSet load_idx_images(const std::filesystem::path& path) {
    return parse_idx_images(detail::read_file(path));
}
inline std::vector<int> load_idx_labels(const std::filesystem::path& path) {
    return parse_idx_labels(detail::read_file(path));
}

/// Attaches labels to an image set; counts must agree.
inline void attach_labels(ImageSet& set, std::vector<int> labels) {
    if (labels.size() != set.count)
        throw IdxError(IdxErrorKind::dimension_mismatch, 4,
                       "label count " + std::to_string(labels.size()) + " != image count " + std::to_string(set.count));
    set.labels = std::move(labels);
}

/// Pixels are stored as round(255 * intensity), clamped to [0, 255].
inline std::vector<std::uint8_t> encode_idx_images(const ImageSet& set) {
    if (set.pixels.size() != set.count * set.pixels_per_image())
        throw DimensionMismatch("encode_idx_images: pixels", set.count * set.pixels_per_image(), set.pixels.size());
    std::vector<std::uint8_t> out;
    out.reserve(16 + set.pixels.size());
    detail::put_u32(out, kIdxImageMagic);
    detail::put_u32(out, static_cast<std::uint32_t>(set.count));
    detail::put_u32(out, static_cast<std::uint32_t>(set.rows));
    detail::put_u32(out, static_cast<std::uint32_t>(set.cols));
    for (double x : set.pixels)
        out.push_back(static_cast<std::uint8_t>(std::lround(std::clamp(x, 0.0, 1.0) * 255.0)));
    return out;
}

inline std::vector<std::uint8_t> encode_idx_labels(std::span<const int> labels) {
    std::vector<std::uint8_t> out;
    detail::put_u32(out, kIdxLabelMagic);
    detail::put_u32(out, static_cast<std::uint32_t>(labels.size()));
    for (int l : labels) {
        if (l < 0 || l > 255) throw InvalidArgument("IDX labels must fit in one byte");
        out.push_back(static_cast<std::uint8_t>(l));
    }
    return out;
}

inline void write_idx_images(const std::filesystem::path& path, const ImageSet& set) {
    detail::write_file(path, encode_idx_images(set));
}
inline void write_idx_labels(const std::filesystem::path& path, std::span<const int> labels) {
    detail::write_file(path, encode_idx_labels(labels));
}

/// Row-major flattening of image `index`.
inline Vector image_signal(const ImageSet& set, std::size_t index) {
    if (index >= set.count)
        throw InvalidArgument("image index " + std::to_string(index) + " out of range (count " +
                              std::to_string(set.count) + ")");
    const std::size_t len = set.pixels_per_image();
    const auto first = set.pixels.begin() + static_cast<std::ptrdiff_t>(index * len);
    return {first, first + static_cast<std::ptrdiff_t>(len)};
}

// --- clustered signals ------------------------------------------------------------

/// `per_type` signals per cluster. Each signal is 1 on two distinct nodes of
/// its home cluster and on one node outside it, 0 elsewhere; its label is the
/// home cluster index.
inline SignalSet cluster_signals(const Graph& g, std::span<const int> clusters, std::size_t per_type, Rng& rng) {
    const std::size_t n = g.node_count();
    if (clusters.size() != n) throw DimensionMismatch("cluster_signals: cluster labels", n, clusters.size());
    std::vector<int> types(clusters.begin(), clusters.end());
    std::sort(types.begin(), types.end());
    types.erase(std::unique(types.begin(), types.end()), types.end());

    SignalSet set;
    set.n = n;
    set.labels.emplace();
    for (int type : types) {
        std::vector<std::size_t> home, away;
        for (std::size_t v = 0; v < n; ++v) (clusters[v] == type ? home : away).push_back(v);
        if (home.size() < 2)
            throw InvalidArgument("cluster " + std::to_string(type) + " has fewer than 2 nodes");
        if (away.empty()) throw InvalidArgument("cluster " + std::to_string(type) + " has no outside nodes");
        for (std::size_t k = 0; k < per_type; ++k) {
            Vector s(n, 0.0);
            const std::size_t a = rng.index(home.size());
            std::size_t b = rng.index(home.size() - 1);
            if (b >= a) ++b;
            s[home[a]] = 1.0;
            s[home[b]] = 1.0;
            s[away[rng.index(away.size())]] = 1.0;
            set.signals.push_back(std::move(s));
            set.labels->push_back(type);
        }
    }
    return set;
}

}  // namespace heatdist
