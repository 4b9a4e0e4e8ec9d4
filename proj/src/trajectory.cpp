#include "slowspec/trajectory.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

namespace slowspec {

static_assert(std::endian::native == std::endian::little,
              "SLOWTRAJ files are little-endian; big-endian hosts are "
              "not supported");

namespace {
constexpr char kMagic[8] = {'S', 'L', 'O', 'W', 'T', 'R', 'A', 'J'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

void Trajectory::validate() const {
  if (states.empty()) throw ConfigError("trajectory has no states");
  if (!(dt > 0.0)) throw ConfigError("trajectory dt must be positive");
  for (const double s : states)
    if (!std::isfinite(s)) throw ConfigError("trajectory contains non-finite state");
}

void write_slowtraj(const std::filesystem::path& path, const Trajectory& t) {
  t.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out.write(kMagic, 8);
  const std::uint32_t version = kVersion;
  const std::uint64_t count = t.states.size();
  out.write(reinterpret_cast<const char*>(&version), sizeof version);
  out.write(reinterpret_cast<const char*>(&count), sizeof count);
  out.write(reinterpret_cast<const char*>(&t.dt), sizeof t.dt);
  out.write(reinterpret_cast<const char*>(&t.seed), sizeof t.seed);
  out.write(reinterpret_cast<const char*>(t.states.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
  if (!out) throw Error("write failed: " + path.string());
}

Trajectory read_slowtraj(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open: " + path.string());
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0)
    throw ConfigError("not a SLOWTRAJ file: " + path.string());
  std::uint32_t version = 0;
  std::uint64_t count = 0;
  Trajectory t;
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  if (version != kVersion)
    throw ConfigError("unsupported SLOWTRAJ version " + std::to_string(version));
  in.read(reinterpret_cast<char*>(&count), sizeof count);
  in.read(reinterpret_cast<char*>(&t.dt), sizeof t.dt);
  in.read(reinterpret_cast<char*>(&t.seed), sizeof t.seed);
  if (!in) throw ConfigError("truncated SLOWTRAJ header: " + path.string());
  t.states.resize(count);
  in.read(reinterpret_cast<char*>(t.states.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (!in) throw ConfigError("truncated SLOWTRAJ payload: " + path.string());
  t.validate();
  return t;
}

void write_states_csv(const std::filesystem::path& path, const Trajectory& t) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out << "x\n";
  char buf[32];
  for (const double s : t.states) {
    std::snprintf(buf, sizeof buf, "%.17g", s);
    out << buf << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace slowspec
