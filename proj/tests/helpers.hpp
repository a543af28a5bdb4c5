#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "spamlens/corpus.hpp"
#include "spamlens/rng.hpp"

namespace testutil {

// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<unsigned> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("spamlens_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string str() const { return path_.string(); }
  std::string file(const std::string& name) const {
    return (path_ / name).string();
  }

 private:
  std::filesystem::path path_;
};

inline spamlens::Corpus make_corpus(
    const std::vector<std::pair<std::string, spamlens::Label>>& rows) {
  spamlens::Corpus corpus;
  for (const auto& [text, label] : rows) {
    spamlens::Message msg;
    msg.id = static_cast<int>(corpus.messages.size());
    msg.text = text;
    msg.label = label;
    corpus.messages.push_back(std::move(msg));
  }
  return corpus;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string data_path() {
  return std::string(SPAMLENS_DATA_DIR) + "/sms_spam.tsv";
}

}  // namespace testutil
