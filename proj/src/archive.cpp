#include "sad/archive.hpp"

#include "sad/error.hpp"

#include <array>
#include <cstring>
#include <fstream>

namespace sad {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::array<char, 8> kMagic{'S', 'A', 'D', 'A', 'R', 'C', 'H', '1'};

std::string dtype_name(torch::ScalarType t) {
    switch (t) {
    case torch::kFloat32: return "f32";
    case torch::kFloat64: return "f64";
    case torch::kInt64: return "i64";
    case torch::kUInt8: return "u8";
    default: throw DataError("archive: unsupported dtype " + std::string(c10::toString(t)));
    }
}

torch::ScalarType dtype_from(const std::string& s) {
    if (s == "f32") return torch::kFloat32;
    if (s == "f64") return torch::kFloat64;
    if (s == "i64") return torch::kInt64;
    if (s == "u8") return torch::kUInt8;
    throw DataError("archive: unknown dtype '" + s + "'");
}

void put_u64(std::ostream& os, std::uint64_t v) {
    std::array<char, 8> b{};
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(b.data(), 8);
}

std::uint64_t get_u64(std::istream& is) {
    std::array<unsigned char, 8> b{};
    is.read(reinterpret_cast<char*>(b.data()), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
    return v;
}

} // namespace

void write_archive(const fs::path& path, const json& meta,
                   const std::vector<std::pair<std::string, torch::Tensor>>& arrays) {
    std::vector<torch::Tensor> payloads;
    json index = json::array();
    std::uint64_t offset = 0;
    for (const auto& [name, t] : arrays) {
        auto c = t.detach().to(torch::kCPU).contiguous();
        const std::uint64_t nbytes = c.numel() * c.element_size();
        index.push_back({{"name", name}, {"dtype", dtype_name(c.scalar_type())}, {"shape", c.sizes().vec()},
                         {"offset", offset}, {"nbytes", nbytes}});
        offset += nbytes;
        payloads.push_back(std::move(c));
    }
    const std::string header = json{{"format", "sad-archive"}, {"version", 1}, {"meta", meta}, {"arrays", index}}.dump();

    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = fs::path(path.string() + ".tmp");
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw IoError("cannot write '" + tmp.string() + "'");
        os.write(kMagic.data(), kMagic.size());
        put_u64(os, header.size());
        os.write(header.data(), static_cast<std::streamsize>(header.size()));
        for (const auto& p : payloads)
            os.write(static_cast<const char*>(p.data_ptr()), static_cast<std::streamsize>(p.numel() * p.element_size()));
        if (!os) throw IoError("short write to '" + tmp.string() + "'");
    }
    fs::rename(tmp, path);
}

Archive read_archive(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open archive '" + path.string() + "'");
    std::array<char, 8> magic{};
    is.read(magic.data(), magic.size());
    if (!is || magic != kMagic) throw DataError("'" + path.string() + "' is not a sad archive");
    const std::uint64_t header_len = get_u64(is);
    std::string header(header_len, '\0');
    is.read(header.data(), static_cast<std::streamsize>(header_len));
    if (!is) throw DataError("truncated archive header in '" + path.string() + "'");

    Archive out;
    json h;
    try {
        h = json::parse(header);
    } catch (const json::exception& e) {
        throw DataError("corrupt archive header: " + std::string(e.what()));
    }
    out.meta = h.value("meta", json::object());
    const auto data_start = is.tellg();
    for (const auto& e : h.at("arrays")) {
        const auto shape = e.at("shape").get<std::vector<std::int64_t>>();
        auto t = torch::empty(shape, dtype_from(e.at("dtype").get<std::string>()));
        const auto nbytes = e.at("nbytes").get<std::uint64_t>();
        if (nbytes != static_cast<std::uint64_t>(t.numel() * t.element_size()))
            throw DataError("archive entry size mismatch for '" + e.at("name").get<std::string>() + "'");
        is.seekg(data_start + static_cast<std::streamoff>(e.at("offset").get<std::uint64_t>()));
        is.read(static_cast<char*>(t.data_ptr()), static_cast<std::streamsize>(nbytes));
        if (!is) throw DataError("truncated archive payload in '" + path.string() + "'");
        out.arrays.emplace(e.at("name").get<std::string>(), std::move(t));
    }
    return out;
}

} // namespace sad
