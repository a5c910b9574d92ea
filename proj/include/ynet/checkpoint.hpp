#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "ynet/errors.hpp"
#include "ynet/tensor.hpp"

// Binary checkpoint format. Layout:
//   magic "YNCKPT1\0"
//   u32 parameter record count, then per record:
//     u32 name length, UTF-8 name, u32 rank, u32 extents..., f32 values (LE)
//   u32 optimizer record count, then records with the same layout holding
//     "<name>.m", "<name>.v" (moment buffers) and "<name>.step" (one f32).
// All integers and floats are little-endian.

namespace ynet {

namespace detail {

inline constexpr char kCheckpointMagic[8] = {'Y', 'N', 'C', 'K', 'P', 'T', '1', '\0'};

inline void write_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), 4);
}

inline std::uint32_t read_u32(std::istream& is) {
  std::uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), 4);
  if (!is) throw DataError("checkpoint truncated");
  return v;
}

inline void write_record(std::ostream& os, const std::string& name, const Shape& shape,
                         const std::vector<float>& values) {
  write_u32(os, static_cast<std::uint32_t>(name.size()));
  os.write(name.data(), static_cast<std::streamsize>(name.size()));
  write_u32(os, static_cast<std::uint32_t>(shape.size()));
  for (int e : shape) write_u32(os, static_cast<std::uint32_t>(e));
  os.write(reinterpret_cast<const char*>(values.data()),
           static_cast<std::streamsize>(values.size() * sizeof(float)));
}

struct RawRecord {
  Shape shape;
  std::vector<float> values;
};

inline std::pair<std::string, RawRecord> read_record(std::istream& is) {
  const std::uint32_t name_len = read_u32(is);
  std::string name(name_len, '\0');
  is.read(name.data(), name_len);
  RawRecord rec;
  const std::uint32_t rank = read_u32(is);
  int volume = 1;
  for (std::uint32_t i = 0; i < rank; ++i) {
    rec.shape.push_back(static_cast<int>(read_u32(is)));
    volume *= rec.shape.back();
  }
  rec.values.resize(static_cast<std::size_t>(volume));
  is.read(reinterpret_cast<char*>(rec.values.data()),
          static_cast<std::streamsize>(rec.values.size() * sizeof(float)));
  if (!is) throw DataError("checkpoint truncated in record '" + name + "'");
  return {name, rec};
}

template <typename Scalar>
std::vector<float> to_f32(const typename Tensor<Scalar>::Array& a) {
  std::vector<float> out(static_cast<std::size_t>(a.size()));
  for (Eigen::Index i = 0; i < a.size(); ++i) out[static_cast<std::size_t>(i)] = static_cast<float>(a[i]);
  return out;
}

}  // namespace detail

template <typename Scalar>
void save_checkpoint(const std::string& path, const std::vector<Parameter<Scalar>*>& params) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("cannot open checkpoint for writing: " + path);
  os.write(detail::kCheckpointMagic, 8);
  detail::write_u32(os, static_cast<std::uint32_t>(params.size()));
  for (const Parameter<Scalar>* p : params) {
    detail::write_record(os, p->name, p->value.shape(), detail::to_f32<Scalar>(p->value.values()));
  }
  detail::write_u32(os, static_cast<std::uint32_t>(3 * params.size()));
  for (const Parameter<Scalar>* p : params) {
    detail::write_record(os, p->name + ".m", p->value.shape(), detail::to_f32<Scalar>(p->moment1));
    detail::write_record(os, p->name + ".v", p->value.shape(), detail::to_f32<Scalar>(p->moment2));
    detail::write_record(os, p->name + ".step", {1}, {static_cast<float>(p->step)});
  }
  if (!os) throw DataError("checkpoint write failed: " + path);
}

/// Restores parameter values (and optimizer state, when present) by name.
/// Every parameter of the model must be present with a matching shape.
template <typename Scalar>
void load_checkpoint(const std::string& path, std::vector<Parameter<Scalar>*>& params) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open checkpoint: " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, detail::kCheckpointMagic, 8) != 0) {
    throw DataError("not a checkpoint file: " + path);
  }
  std::map<std::string, detail::RawRecord> records;
  const std::uint32_t n_params = detail::read_u32(is);
  for (std::uint32_t i = 0; i < n_params; ++i) records.insert(detail::read_record(is));
  std::map<std::string, detail::RawRecord> opt;
  const std::uint32_t n_opt = detail::read_u32(is);
  for (std::uint32_t i = 0; i < n_opt; ++i) opt.insert(detail::read_record(is));

  for (Parameter<Scalar>* p : params) {
    auto it = records.find(p->name);
    if (it == records.end()) throw DataError("checkpoint is missing parameter '" + p->name + "'");
    if (it->second.shape != p->value.shape()) {
      throw DataError("checkpoint shape mismatch for '" + p->name + "': file " +
                      shape_string(it->second.shape) + " vs model " +
                      shape_string(p->value.shape()));
    }
    for (int i = 0; i < p->value.size(); ++i) {
      p->value.values()[i] = static_cast<Scalar>(it->second.values[static_cast<std::size_t>(i)]);
    }
    auto m = opt.find(p->name + ".m");
    auto v = opt.find(p->name + ".v");
    auto s = opt.find(p->name + ".step");
    if (m != opt.end() && v != opt.end() && s != opt.end()) {
      for (int i = 0; i < p->value.size(); ++i) {
        p->moment1[i] = static_cast<Scalar>(m->second.values[static_cast<std::size_t>(i)]);
        p->moment2[i] = static_cast<Scalar>(v->second.values[static_cast<std::size_t>(i)]);
      }
      p->step = static_cast<long>(s->second.values[0]);
    }
  }
}

}  // namespace ynet
