#pragma once

#include <string>
#include <vector>

namespace sfcbip {

enum class FixtureKind { sfc, bip };

struct FixtureInfo {
  std::string name;
  FixtureKind kind;
  std::string path;
};

/// Fixtures shipped in the repository's fixtures/ directory, sorted by name.
std::vector<FixtureInfo> list_fixtures();

/// Exact stored text of `name` (`fig3`, `temperature`, ...). Throws std::runtime_error when unknown.
std::string load_fixture(const std::string& name);
FixtureInfo find_fixture(const std::string& name);

std::string fixture_dir();
std::string read_file(const std::string& path);

}  // namespace sfcbip
