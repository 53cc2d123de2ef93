#include "des/canonical.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string_view>
#include <vector>

#include "des/error.hpp"

namespace des {

namespace {

// UTF-8 to UTF-16 code units, used only as a sort key.
std::u16string utf16_units(std::string_view s) {
  std::u16string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    auto c = static_cast<unsigned char>(s[i]);
    char32_t cp;
    std::size_t len;
    if (c < 0x80) {
      cp = c;
      len = 1;
    } else if ((c >> 5) == 0x6) {
      cp = c & 0x1f;
      len = 2;
    } else if ((c >> 4) == 0xe) {
      cp = c & 0x0f;
      len = 3;
    } else {
      cp = c & 0x07;
      len = 4;
    }
    for (std::size_t k = 1; k < len && i + k < s.size(); ++k) {
      cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3f);
    }
    i += len;
    if (cp >= 0x10000) {
      cp -= 0x10000;
      out.push_back(static_cast<char16_t>(0xd800 + (cp >> 10)));
      out.push_back(static_cast<char16_t>(0xdc00 + (cp & 0x3ff)));
    } else {
      out.push_back(static_cast<char16_t>(cp));
    }
  }
  return out;
}

void write_string(std::string_view s, std::string& out) {
  static constexpr char hex[] = "0123456789abcdef";
  out.push_back('"');
  for (char ch : s) {
    auto c = static_cast<unsigned char>(ch);
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\b': out += "\\b"; break;
      case '\f': out += "\\f"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (c < 0x20) {
          out += "\\u00";
          out.push_back(hex[c >> 4]);
          out.push_back(hex[c & 0xf]);
        } else {
          out.push_back(ch);
        }
    }
  }
  out.push_back('"');
}

}  // namespace

std::string canonical_number(double value) {
  if (!std::isfinite(value)) {
    throw Error(ErrorCode::canonicalization_error, "non-finite number cannot be canonicalized");
  }
  if (value == 0) return "0";

  // Shortest round-trip digits in scientific form: d[.ddd]e[+-]x
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, std::abs(value), std::chars_format::scientific);
  std::string_view sci(buf, static_cast<std::size_t>(res.ptr - buf));
  auto e_pos = sci.find('e');
  std::string digits;
  for (char c : sci.substr(0, e_pos)) {
    if (c != '.') digits.push_back(c);
  }
  while (digits.size() > 1 && digits.back() == '0') digits.pop_back();
  int exponent = 0;
  auto exp_text = sci.substr(e_pos + 1);
  if (!exp_text.empty() && exp_text[0] == '+') exp_text.remove_prefix(1);
  std::from_chars(exp_text.data(), exp_text.data() + exp_text.size(), exponent);

  const int k = static_cast<int>(digits.size());
  const int n = exponent + 1;
  std::string out = value < 0 ? "-" : "";
  if (k <= n && n <= 21) {
    out += digits;
    out.append(static_cast<std::size_t>(n - k), '0');
  } else if (0 < n && n <= 21) {
    out += digits.substr(0, static_cast<std::size_t>(n));
    out += '.';
    out += digits.substr(static_cast<std::size_t>(n));
  } else if (-6 < n && n <= 0) {
    out += "0.";
    out.append(static_cast<std::size_t>(-n), '0');
    out += digits;
  } else {
    out += digits[0];
    if (k > 1) {
      out += '.';
      out += digits.substr(1);
    }
    out += 'e';
    out += (n - 1 >= 0) ? '+' : '-';
    out += std::to_string(std::abs(n - 1));
  }
  return out;
}

void canonicalize_to(const Json& value, std::string& out) {
  switch (value.type()) {
    case Json::value_t::null:
      throw Error(ErrorCode::canonicalization_error, "null is not permitted in canonical documents");
    case Json::value_t::boolean:
      out += value.get<bool>() ? "true" : "false";
      break;
    case Json::value_t::number_integer:
      out += canonical_number(static_cast<double>(value.get<std::int64_t>()));
      break;
    case Json::value_t::number_unsigned:
      out += canonical_number(static_cast<double>(value.get<std::uint64_t>()));
      break;
    case Json::value_t::number_float:
      out += canonical_number(value.get<double>());
      break;
    case Json::value_t::string:
      write_string(value.get_ref<const std::string&>(), out);
      break;
    case Json::value_t::array: {
      out.push_back('[');
      bool first = true;
      for (const auto& item : value) {
        if (!first) out.push_back(',');
        first = false;
        canonicalize_to(item, out);
      }
      out.push_back(']');
      break;
    }
    case Json::value_t::object: {
      struct Entry {
        std::u16string sort_key;
        const std::string* key;
        const Json* value;
      };
      std::vector<Entry> entries;
      entries.reserve(value.size());
      for (auto it = value.begin(); it != value.end(); ++it) {
        entries.push_back({utf16_units(it.key()), &it.key(), &it.value()});
      }
      std::sort(entries.begin(), entries.end(),
                [](const Entry& a, const Entry& b) { return a.sort_key < b.sort_key; });
      out.push_back('{');
      bool first = true;
      for (const auto& entry : entries) {
        if (!first) out.push_back(',');
        first = false;
        write_string(*entry.key, out);
        out.push_back(':');
        canonicalize_to(*entry.value, out);
      }
      out.push_back('}');
      break;
    }
    case Json::value_t::binary:
    case Json::value_t::discarded:
      throw Error(ErrorCode::canonicalization_error, "value has no JSON representation");
  }
}

std::string canonicalize(const Json& value) {
  std::string out;
  canonicalize_to(value, out);
  return out;
}

}  // namespace des
