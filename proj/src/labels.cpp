// SPDX-License-Identifier: Apache-2.0
#include "sake/labels.hpp"

namespace sake {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

static char to_lower_ascii(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string normalize_label(std::string_view raw) {
  const auto s = trim(raw);
  std::string out;
  out.reserve(s.size());
  bool in_space = false;
  for (char c : s) {
    if (is_space(c)) {
      in_space = true;
      continue;
    }
    if (in_space) {
      out.push_back('_');
      in_space = false;
    }
    out.push_back(to_lower_ascii(c));
  }
  return out;
}

std::string normalize_answer(std::string_view raw) {
  const auto s = trim(raw);
  std::string out(s);
  for (char& c : out) c = to_lower_ascii(c);
  return out;
}

}  // namespace sake
