#include "spraylab/field_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "spraylab/errors.hpp"

namespace spray {

namespace {

constexpr char kMagic[4] = {'S', 'P', 'R', 'Y'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "snapshot writer assumes a little endian host");

template <typename T>
void put(std::ofstream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& is, const char* what) {
    T v;
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw ConfigError(std::string("snapshot truncated while reading ") + what);
    return v;
}

} // namespace

void write_field(const std::filesystem::path& path, const GridField& f) {
    if (!f.finite())
        throw InvariantViolation("refusing to write snapshot with non-finite samples: " + path.string());
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw ConfigError("cannot open snapshot for writing: " + path.string());
    os.write(kMagic, 4);
    put(os, kVersion);
    put(os, f.grid().half_width);
    put(os, static_cast<std::uint32_t>(f.grid().n));
    put(os, static_cast<std::uint32_t>(f.components()));
    os.write(reinterpret_cast<const char*>(f.samples().data()),
             static_cast<std::streamsize>(f.samples().size() * sizeof(double)));
    if (!os) throw ConfigError("short write on snapshot: " + path.string());
}

GridField read_field(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot open snapshot: " + path.string());
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw ConfigError("bad snapshot magic in " + path.string());
    const auto version = get<std::uint32_t>(is, "version");
    if (version != kVersion)
        throw ConfigError("unsupported snapshot version " + std::to_string(version));
    const auto half_width = get<double>(is, "half_width");
    const auto n = get<std::uint32_t>(is, "n");
    const auto components = get<std::uint32_t>(is, "components");
    if (components != 1 && components != 2)
        throw ConfigError("snapshot component count must be 1 or 2");
    GridField f(Grid(half_width, static_cast<int>(n)), static_cast<int>(components));
    is.read(reinterpret_cast<char*>(f.samples().data()),
            static_cast<std::streamsize>(f.samples().size() * sizeof(double)));
    if (!is) throw ConfigError("snapshot payload truncated: " + path.string());
    if (!f.finite()) throw ConfigError("snapshot holds non-finite samples: " + path.string());
    return f;
}

} // namespace spray
