#include "spamlens/preprocess.hpp"

#include <cctype>
#include <sstream>
#include <unordered_map>
#include <vector>

#include "spamlens/errors.hpp"

namespace spamlens {

namespace {

bool keep_byte(unsigned char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
         (c >= '0' && c <= '9');
}

}  // namespace

std::string clean_text(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (unsigned char c : text) {
    if (keep_byte(c)) {
      if (pending_space && !out.empty()) out.push_back(' ');
      pending_space = false;
      out.push_back(static_cast<char>(c));
    } else {
      pending_space = true;
    }
  }
  return out;
}

std::string remove_repeat(const std::string& text, int repeat) {
  if (repeat < 1) throw UsageError("remove_repeat: repeat must be >= 1");
  std::istringstream in(text);
  std::unordered_map<std::string, int> seen;
  std::string word;
  std::string out;
  while (in >> word) {
    int& count = seen[word];
    if (count < repeat) {
      ++count;
      if (!out.empty()) out.push_back(' ');
      out += word;
    }
  }
  return out;
}

std::string preprocess(const std::string& text) {
  return remove_repeat(clean_text(text), 1);
}

}  // namespace spamlens
