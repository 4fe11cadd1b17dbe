#include "prosodyrl/serialize.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "prosodyrl/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "serialization assumes a little-endian host");

namespace prosody::ad {

namespace {

constexpr char kMagic[4] = {'P', 'T', 'E', 'N'};
constexpr uint32_t kVersion = 1;

template <typename T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T take(std::ifstream& in, const std::string& path) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  require(in.good(), Error::Kind::IoError, path + ": truncated tensor file");
  return v;
}

}  // namespace

void save_tensors(const std::string& path, const std::vector<NamedTensor>& tensors) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), Error::Kind::IoError, "cannot write " + path);

  out.write(kMagic, 4);
  put(out, kVersion);
  put(out, static_cast<uint32_t>(tensors.size()));

  uint64_t offset = 0;
  for (const auto& [name, tensor] : tensors) {
    require(name.size() <= 65535, Error::Kind::BadArgument, "tensor name too long");
    require(tensor->shape.size() <= 255, Error::Kind::BadArgument, "too many dimensions");
    put(out, static_cast<uint16_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put(out, static_cast<uint8_t>(tensor->shape.size()));
    for (int64_t d : tensor->shape) put(out, static_cast<uint32_t>(d));
    const uint64_t nbytes = tensor->values.size() * sizeof(float);
    put(out, offset);
    put(out, nbytes);
    offset += nbytes;
  }

  put(out, offset);
  for (const auto& [name, tensor] : tensors) {
    out.write(reinterpret_cast<const char*>(tensor->values.data()),
              static_cast<std::streamsize>(tensor->values.size() * sizeof(float)));
  }
  require(out.good(), Error::Kind::IoError, "short write to " + path);
}

std::vector<std::pair<std::string, Tensor>> load_tensors(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), Error::Kind::IoError, "cannot open " + path);

  char magic[4];
  in.read(magic, 4);
  require(in.good() && std::memcmp(magic, kMagic, 4) == 0, Error::Kind::UnsupportedFormat,
          path + ": not a tensor file");
  const uint32_t version = take<uint32_t>(in, path);
  require(version == kVersion, Error::Kind::UnsupportedFormat,
          path + ": unsupported tensor format version");
  const uint32_t count = take<uint32_t>(in, path);

  struct Entry {
    std::string name;
    std::vector<int64_t> shape;
    uint64_t offset;
    uint64_t nbytes;
  };
  std::vector<Entry> table;
  table.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    Entry e;
    const uint16_t name_len = take<uint16_t>(in, path);
    e.name.resize(name_len);
    in.read(e.name.data(), name_len);
    require(in.good(), Error::Kind::IoError, path + ": truncated tensor file");
    const uint8_t ndim = take<uint8_t>(in, path);
    for (uint8_t d = 0; d < ndim; ++d)
      e.shape.push_back(static_cast<int64_t>(take<uint32_t>(in, path)));
    e.offset = take<uint64_t>(in, path);
    e.nbytes = take<uint64_t>(in, path);
    table.push_back(std::move(e));
  }
  const uint64_t data_size = take<uint64_t>(in, path);

  const std::streampos data_start = in.tellg();
  std::vector<std::pair<std::string, Tensor>> result;
  result.reserve(count);
  for (const Entry& e : table) {
    require(e.offset + e.nbytes <= data_size, Error::Kind::IoError,
            path + ": tensor extends past the data block");
    Tensor t;
    t.shape = e.shape;
    require(t.numel() * sizeof(float) == e.nbytes, Error::Kind::ShapeMismatch,
            path + ": tensor byte count does not match its shape");
    t.values.resize(e.nbytes / sizeof(float));
    in.seekg(data_start + static_cast<std::streamoff>(e.offset));
    in.read(reinterpret_cast<char*>(t.values.data()), static_cast<std::streamsize>(e.nbytes));
    require(in.good(), Error::Kind::IoError, path + ": truncated tensor data");
    result.emplace_back(e.name, std::move(t));
  }
  return result;
}

}  // namespace prosody::ad
