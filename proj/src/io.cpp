#include "ecsrl/io.hpp"

#include <fstream>
#include <sstream>

#include "ecsrl/errors.hpp"

namespace ecsrl {

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("write_atomic: cannot open '" + tmp.string() + "'");
    out << content;
    if (!out) throw DataError("write_atomic: write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("read_file: cannot open '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace ecsrl
