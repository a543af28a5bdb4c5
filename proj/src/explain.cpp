#include "spamlens/explain.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "spamlens/errors.hpp"

namespace spamlens {

namespace {

bool is_structural(const std::string& piece) {
  return piece == "[PAD]" || piece == "[CLS]" || piece == "[SEP]";
}

std::string html_escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

}  // namespace

std::vector<WordAttribution> merge_subwords(
    const std::vector<std::pair<std::string, double>>& piece_attributions) {
  std::vector<WordAttribution> words;
  for (const auto& [piece, value] : piece_attributions) {
    if (is_structural(piece)) continue;
    if (piece.rfind("##", 0) == 0) {
      if (words.empty()) {
        throw DataError("merge_subwords: continuation piece without a word");
      }
      words.back().word += piece.substr(2);
      words.back().coefficient += value;
    } else {
      words.push_back({piece, value});
    }
  }
  return words;
}

void sort_by_magnitude(std::vector<WordAttribution>& attributions) {
  std::stable_sort(attributions.begin(), attributions.end(),
                   [](const WordAttribution& a, const WordAttribution& b) {
                     return std::abs(a.coefficient) > std::abs(b.coefficient);
                   });
}

nlohmann::json explanation_to_json(const Explanation& explanation) {
  nlohmann::json words = nlohmann::json::array();
  for (const auto& attr : explanation.attributions) {
    words.push_back({{"word", attr.word}, {"coefficient", attr.coefficient}});
  }
  nlohmann::json out = {
      {"method", explanation.method},
      {"target_class", static_cast<int>(explanation.target_class)},
      {"target_class_name", label_name(explanation.target_class)},
      {"prediction", explanation.prediction},
      {"words", words},
  };
  if (explanation.has_raw_sum) out["raw_sum"] = explanation.raw_sum;
  return out;
}

std::string explanation_to_html(const Explanation& explanation) {
  double max_abs = 0.0;
  for (const auto& attr : explanation.attributions) {
    max_abs = std::max(max_abs, std::abs(attr.coefficient));
  }
  std::ostringstream out;
  out << "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\">"
      << "<title>" << explanation.method << " explanation</title></head>\n"
      << "<body style=\"font-family:sans-serif;max-width:48em;margin:2em\">\n"
      << "<h2>" << explanation.method << " &mdash; target "
      << label_name(explanation.target_class) << " (p="
      << explanation.prediction << ")</h2>\n<p>\n";
  for (const auto& attr : explanation.attributions) {
    const double alpha =
        max_abs > 0.0 ? std::abs(attr.coefficient) / max_abs : 0.0;
    const char* rgb = attr.coefficient >= 0.0 ? "0,160,0" : "200,0,0";
    out << "<span style=\"background:rgba(" << rgb << "," << alpha
        << ");padding:2px;margin:1px;border-radius:3px\" title=\""
        << attr.coefficient << "\">" << html_escape(attr.word)
        << "</span> ";
  }
  out << "\n</p>\n<table border=\"1\" cellpadding=\"4\">"
      << "<tr><th>word</th><th>coefficient</th></tr>\n";
  for (const auto& attr : explanation.attributions) {
    out << "<tr><td>" << html_escape(attr.word) << "</td><td>"
        << attr.coefficient << "</td></tr>\n";
  }
  out << "</table>\n</body></html>\n";
  return out.str();
}

}  // namespace spamlens
