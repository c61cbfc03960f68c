#pragma once

// Hex fixture files: pairs of hex digits separated by whitespace, with '#'
// starting a comment that runs to the end of the line.

#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "tcpnc/rlnc.hpp"

namespace fixtures {

inline std::filesystem::path dir() { return TCPNC_FIXTURE_DIR; }

inline tcpnc::Bytes load_hex(const std::string& name) {
  std::ifstream in(dir() / name);
  if (!in) throw std::runtime_error("missing fixture " + name);
  tcpnc::Bytes out;
  std::string line;
  while (std::getline(in, line)) {
    line = line.substr(0, line.find('#'));
    std::istringstream words(line);
    std::string word;
    while (words >> word) {
      if (word.size() != 2 || !std::isxdigit(static_cast<unsigned char>(word[0])) ||
          !std::isxdigit(static_cast<unsigned char>(word[1])))
        throw std::runtime_error("bad hex byte '" + word + "' in " + name);
      out.push_back(static_cast<std::uint8_t>(std::stoi(word, nullptr, 16)));
    }
  }
  return out;
}

}  // namespace fixtures
