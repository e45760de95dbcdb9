#include "sfcbip/fixtures.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fs = std::filesystem;

namespace sfcbip {

std::string fixture_dir() {
  if (const char* env = std::getenv("SFC2BIP_FIXTURES")) return env;
#ifdef SFCBIP_FIXTURE_DIR
  return SFCBIP_FIXTURE_DIR;
#else
  return "fixtures";
#endif
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<FixtureInfo> list_fixtures() {
  std::vector<FixtureInfo> out;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(fixture_dir(), ec)) {
    const auto& p = entry.path();
    if (p.extension() == ".sfc") out.push_back({p.stem().string(), FixtureKind::sfc, p.string()});
    else if (p.extension() == ".bip") out.push_back({p.stem().string(), FixtureKind::bip, p.string()});
  }
  std::sort(out.begin(), out.end(), [](const FixtureInfo& a, const FixtureInfo& b) {
    return a.name != b.name ? a.name < b.name : a.kind < b.kind;
  });
  return out;
}

FixtureInfo find_fixture(const std::string& name) {
  for (const auto& f : list_fixtures()) {
    if (f.name == name) return f;
  }
  throw std::runtime_error("unknown fixture '" + name + "'");
}

std::string load_fixture(const std::string& name) { return read_file(find_fixture(name).path); }

}  // namespace sfcbip
