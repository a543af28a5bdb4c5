#pragma once

#include <string>

namespace spamlens {

// Replaces every byte outside [A-Za-z0-9] with a space, collapses whitespace
// runs to single spaces and trims. The output alphabet is [A-Za-z0-9 ] with
// no leading/trailing/doubled spaces. Multi-byte UTF-8 sequences fall outside
// the kept alphabet byte-wise, so they collapse into separators.
std::string clean_text(const std::string& text);

// Scans words left to right and keeps a word only while its count in the
// output so far is below `repeat`. Word equality is case-sensitive.
// `text` is expected to already be in clean_text form.
std::string remove_repeat(const std::string& text, int repeat);

// clean_text followed by remove_repeat(.., 1); idempotent.
std::string preprocess(const std::string& text);

}  // namespace spamlens
