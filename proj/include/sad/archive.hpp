#pragma once

#include "json.hpp"

#include <torch/torch.h>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace sad {

/// Single-file container of named arrays with a JSON header.
///
/// Layout: 8-byte magic "SADARCH1", little-endian u64 header length, the
/// UTF-8 JSON header, then the raw little-endian array payloads back to back.
/// The header's "arrays" list gives name, dtype, shape, offset and byte count
/// (offsets relative to the payload start); everything else in the header is
/// caller metadata under "meta".
struct Archive {
    nlohmann::json meta = nlohmann::json::object();
    std::map<std::string, torch::Tensor> arrays;
};

/// Atomic write: the file is written to `<path>.tmp` and renamed into place.
void write_archive(const std::filesystem::path& path, const nlohmann::json& meta,
                   const std::vector<std::pair<std::string, torch::Tensor>>& arrays);

Archive read_archive(const std::filesystem::path& path);

} // namespace sad
