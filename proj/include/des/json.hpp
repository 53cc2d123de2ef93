#pragma once

#include <json.hpp>

#include <filesystem>
#include <string>
#include <string_view>

namespace des {

// Insertion-ordered JSON value. Key order is preserved as parsed; canonical
// ordering is applied only by canonicalize().
using Json = nlohmann::ordered_json;

struct ParseOptions {
  bool reject_nulls = true;
  bool reject_duplicate_keys = true;
};

// Parses a UTF-8 JSON document. Throws SyntaxError (with byte offset) on
// malformed input, Error{null_forbidden} with the offending path when a null
// is present, and Error{format_error} on duplicate object keys.
Json parse_json(std::string_view text, const ParseOptions& options = {});

// Returns the dotted path of the first null in `value`, or an empty string.
std::string find_null(const Json& value, const std::string& prefix = {});

std::string join_path(std::string_view prefix, std::string_view key);
std::string index_path(std::string_view prefix, std::size_t index);

// Whole-file read. Throws Error{io_error}.
std::string read_file(const std::filesystem::path& path);

}  // namespace des
