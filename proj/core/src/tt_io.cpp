#include "ttsurrogate/tt_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

namespace ttsurrogate {

namespace {

template <typename T>
void put(std::ostream& os, T value) {
    std::array<char, sizeof(T)> bytes;
    std::memcpy(bytes.data(), &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
        std::reverse(bytes.begin(), bytes.end());
    }
    os.write(bytes.data(), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
    std::array<char, sizeof(T)> bytes;
    if (!is.read(bytes.data(), sizeof(T))) {
        throw FormatError("truncated tensor-train stream");
    }
    if constexpr (std::endian::native == std::endian::big) {
        std::reverse(bytes.begin(), bytes.end());
    }
    T value;
    std::memcpy(&value, bytes.data(), sizeof(T));
    return value;
}

std::uint32_t to_u32(std::size_t v) {
    if (v > std::numeric_limits<std::uint32_t>::max()) {
        throw FormatError("dimension does not fit the u32 header field");
    }
    return static_cast<std::uint32_t>(v);
}

void expect_magic(std::istream& is, const char (&magic)[5]) {
    char buf[4];
    if (!is.read(buf, 4) || std::memcmp(buf, magic, 4) != 0) {
        throw FormatError(std::string("missing magic ") + magic);
    }
}

// Guards the allocation below against corrupted headers.
constexpr std::size_t max_core_values = std::size_t{1} << 32;

}  // namespace

void write_tt(std::ostream& os, const TensorTrain& tt) {
    os.write("TTV1", 4);
    put<std::uint32_t>(os, to_u32(tt.num_cores()));
    for (const auto& c : tt.cores()) {
        put<std::uint32_t>(os, to_u32(c.left_rank()));
        put<std::uint32_t>(os, to_u32(c.dim()));
        put<std::uint32_t>(os, to_u32(c.right_rank()));
        for (double v : c.data()) put<double>(os, v);
    }
    if (!os) throw FormatError("write_tt: stream error");
}

TensorTrain read_tt(std::istream& is) {
    expect_magic(is, "TTV1");
    const auto d = get<std::uint32_t>(is);
    std::vector<Core3> cores;
    cores.reserve(d);
    for (std::uint32_t k = 0; k < d; ++k) {
        const std::size_t rl = get<std::uint32_t>(is);
        const std::size_t n = get<std::uint32_t>(is);
        const std::size_t rr = get<std::uint32_t>(is);
        const std::size_t count = rl * n * rr;
        if (count > max_core_values) throw FormatError("read_tt: implausible core size");
        std::vector<double> data(count);
        for (double& v : data) v = get<double>(is);
        cores.emplace_back(rl, n, rr, std::move(data));
    }
    try {
        return TensorTrain(std::move(cores));
    } catch (const DimensionError& e) {
        throw FormatError(std::string("read_tt: ") + e.what());
    }
}

void write_ttm(std::ostream& os, const TTMatrix& m) {
    os.write("TTM1", 4);
    put<std::uint32_t>(os, to_u32(m.num_cores()));
    for (const auto& c : m.cores()) {
        put<std::uint32_t>(os, to_u32(c.left_rank()));
        put<std::uint32_t>(os, to_u32(c.row_dim()));
        put<std::uint32_t>(os, to_u32(c.col_dim()));
        put<std::uint32_t>(os, to_u32(c.right_rank()));
        for (double v : c.data()) put<double>(os, v);
    }
    if (!os) throw FormatError("write_ttm: stream error");
}

TTMatrix read_ttm(std::istream& is) {
    expect_magic(is, "TTM1");
    const auto d = get<std::uint32_t>(is);
    std::vector<Core4> cores;
    cores.reserve(d);
    for (std::uint32_t k = 0; k < d; ++k) {
        const std::size_t rl = get<std::uint32_t>(is);
        const std::size_t m = get<std::uint32_t>(is);
        const std::size_t n = get<std::uint32_t>(is);
        const std::size_t rr = get<std::uint32_t>(is);
        const std::size_t count = rl * m * n * rr;
        if (count > max_core_values) throw FormatError("read_ttm: implausible core size");
        std::vector<double> data(count);
        for (double& v : data) v = get<double>(is);
        cores.emplace_back(rl, m, n, rr, std::move(data));
    }
    try {
        return TTMatrix(std::move(cores));
    } catch (const DimensionError& e) {
        throw FormatError(std::string("read_ttm: ") + e.what());
    }
}

void save_tt(const std::filesystem::path& path, const TensorTrain& tt) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FormatError("cannot open " + path.string() + " for writing");
    write_tt(os, tt);
}

TensorTrain load_tt(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot open " + path.string());
    return read_tt(is);
}

void save_ttm(const std::filesystem::path& path, const TTMatrix& m) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FormatError("cannot open " + path.string() + " for writing");
    write_ttm(os, m);
}

TTMatrix load_ttm(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot open " + path.string());
    return read_ttm(is);
}

}  // namespace ttsurrogate
