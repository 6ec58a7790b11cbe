/* Copyright 2026 The TFWaveFormer Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

// Binary checkpoint.
//
//   magic "TFWF", version byte
//   repeated: u32 name length, UTF-8 name, u32 rank, u32 dims[rank],
//             f32 payload[prod(dims)]          (all little-endian)
//
// Model parameters use their registry names. Optimizer moments are stored as
// "adam.m/<name>" and "adam.v/<name>". Non-float state (step count, config
// text, RNG state) is stored in "meta.*" records whose payload holds raw
// 32-bit words, so it survives a round trip bit for bit.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "tfwf/config.hpp"
#include "tfwf/model.hpp"
#include "tfwf/optimizer.hpp"

namespace tfwf {

inline constexpr std::uint8_t kCheckpointVersion = 1;
inline constexpr char kCheckpointMagic[4] = {'T', 'F', 'W', 'F'};

struct CheckpointRecord {
  std::string name;
  std::vector<std::uint32_t> dims;
  std::vector<std::uint32_t> words;  // f32 payload as raw bit patterns

  friend bool operator==(const CheckpointRecord&, const CheckpointRecord&) = default;
};

struct Checkpoint {
  std::uint8_t version = kCheckpointVersion;
  std::vector<CheckpointRecord> records;

  const CheckpointRecord* find(const std::string& name) const {
    for (const auto& r : records)
      if (r.name == name) return &r;
    return nullptr;
  }
  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

inline std::uint32_t get_u32(const std::string& in, std::size_t& pos) {
  if (pos + 4 > in.size()) throw FormatError("checkpoint truncated at byte " + std::to_string(pos));
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  pos += 4;
  return v;
}

inline std::vector<std::uint32_t> pack_text(const std::string& text) {
  std::vector<std::uint32_t> words{static_cast<std::uint32_t>(text.size())};
  for (std::size_t i = 0; i < text.size(); i += 4) {
    std::uint32_t w = 0;
    for (std::size_t b = 0; b < 4 && i + b < text.size(); ++b)
      w |= static_cast<std::uint32_t>(static_cast<unsigned char>(text[i + b])) << (8 * b);
    words.push_back(w);
  }
  return words;
}

inline std::string unpack_text(const std::vector<std::uint32_t>& words) {
  if (words.empty()) throw FormatError("checkpoint text record is empty");
  const std::size_t n = words[0];
  if ((n + 3) / 4 + 1 != words.size()) throw FormatError("checkpoint text record has inconsistent length");
  std::string out(n, '\0');
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<char>((words[1 + i / 4] >> (8 * (i % 4))) & 0xFFu);
  return out;
}

template <typename T>
std::vector<std::uint32_t> float_words(const std::vector<T>& values) {
  std::vector<std::uint32_t> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = std::bit_cast<std::uint32_t>(static_cast<float>(values[i]));
  return out;
}

template <typename T>
std::vector<T> from_words(const std::vector<std::uint32_t>& words) {
  std::vector<T> out(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) out[i] = static_cast<T>(std::bit_cast<float>(words[i]));
  return out;
}

}  // namespace detail

inline std::string serialize_checkpoint(const Checkpoint& ckpt) {
  std::string out(kCheckpointMagic, 4);
  out.push_back(static_cast<char>(ckpt.version));
  for (const auto& r : ckpt.records) {
    detail::put_u32(out, static_cast<std::uint32_t>(r.name.size()));
    out += r.name;
    detail::put_u32(out, static_cast<std::uint32_t>(r.dims.size()));
    std::size_t count = 1;
    for (auto d : r.dims) {
      detail::put_u32(out, d);
      count *= d;
    }
    if (count != r.words.size()) throw ContractError("checkpoint record '" + r.name + "' payload/shape mismatch");
    for (auto w : r.words) detail::put_u32(out, w);
  }
  return out;
}

inline Checkpoint deserialize_checkpoint(const std::string& bytes) {
  if (bytes.size() < 5 || std::memcmp(bytes.data(), kCheckpointMagic, 4) != 0) {
    throw FormatError("not a checkpoint: bad magic bytes");
  }
  Checkpoint ckpt;
  ckpt.version = static_cast<std::uint8_t>(bytes[4]);
  if (ckpt.version != kCheckpointVersion) {
    throw LoadError("checkpoint version " + std::to_string(ckpt.version) + " is not supported (expected " +
                    std::to_string(kCheckpointVersion) + ")");
  }
  std::size_t pos = 5;
  while (pos < bytes.size()) {
    CheckpointRecord r;
    const auto name_len = detail::get_u32(bytes, pos);
    if (pos + name_len > bytes.size()) throw FormatError("checkpoint truncated inside a record name");
    r.name = bytes.substr(pos, name_len);
    pos += name_len;
    const auto rank = detail::get_u32(bytes, pos);
    std::size_t count = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
      r.dims.push_back(detail::get_u32(bytes, pos));
      count *= r.dims.back();
    }
    if (count > (bytes.size() - pos) / 4) throw FormatError("checkpoint truncated inside record '" + r.name + "'");
    r.words.resize(count);
    for (auto& w : r.words) w = detail::get_u32(bytes, pos);
    ckpt.records.push_back(std::move(r));
  }
  return ckpt;
}

inline void write_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write checkpoint '" + path + "'");
  const auto bytes = serialize_checkpoint(ckpt);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("write failed for checkpoint '" + path + "'");
}

inline Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint '" + path + "'");
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

// Collects the model (and optionally optimizer / RNG) state.
template <typename T>
Checkpoint make_checkpoint(const TFWaveFormer<T>& model, const RunConfig& config, const Adam<T>* optimizer = nullptr,
                           const Rng* rng = nullptr) {
  Checkpoint ckpt;
  const auto& params = model.params().all();
  for (const auto& p : params) {
    std::vector<std::uint32_t> dims(p.value.shape().begin(), p.value.shape().end());
    std::vector<T> values(p.value.data().begin(), p.value.data().end());
    ckpt.records.push_back({p.name, std::move(dims), detail::float_words(values)});
  }
  if (optimizer) {
    for (std::size_t k = 0; k < params.size(); ++k) {
      std::vector<std::uint32_t> dims(params[k].value.shape().begin(), params[k].value.shape().end());
      ckpt.records.push_back({"adam.m/" + params[k].name, dims, detail::float_words(optimizer->first_moments()[k])});
      ckpt.records.push_back({"adam.v/" + params[k].name, dims, detail::float_words(optimizer->second_moments()[k])});
    }
    const std::uint64_t steps = optimizer->steps();
    ckpt.records.push_back({"meta.adam_steps", {2},
                            {static_cast<std::uint32_t>(steps & 0xFFFFFFFFu), static_cast<std::uint32_t>(steps >> 32)}});
  }
  auto config_words = detail::pack_text(config.to_text());
  ckpt.records.push_back({"meta.config", {static_cast<std::uint32_t>(config_words.size())}, std::move(config_words)});
  if (rng) {
    std::ostringstream os;
    os << *rng;
    auto rng_words = detail::pack_text(os.str());
    ckpt.records.push_back({"meta.rng", {static_cast<std::uint32_t>(rng_words.size())}, std::move(rng_words)});
  }
  return ckpt;
}

inline RunConfig config_from_checkpoint(const Checkpoint& ckpt) {
  const auto* rec = ckpt.find("meta.config");
  if (!rec) throw LoadError("checkpoint has no meta.config record");
  RunConfig cfg;
  apply_config_text(cfg, detail::unpack_text(rec->words));
  return cfg;
}

inline std::size_t edge_dim_from_checkpoint(const Checkpoint& ckpt) {
  const auto* rec = ckpt.find("align.edge.weight");
  if (!rec || rec->dims.size() != 2) throw LoadError("checkpoint has no align.edge.weight record");
  return rec->dims[0];
}

// Copies parameters (and optimizer / RNG state when present and requested)
// into an already-constructed model of matching architecture.
template <typename T>
void restore_checkpoint(const Checkpoint& ckpt, TFWaveFormer<T>& model, Adam<T>* optimizer = nullptr,
                        Rng* rng = nullptr) {
  auto& params = model.params().all();
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& p = params[k];
    const auto* rec = ckpt.find(p.name);
    if (!rec) throw LoadError("checkpoint is missing parameter '" + p.name + "'");
    const Shape shape(rec->dims.begin(), rec->dims.end());
    if (shape != p.value.shape()) {
      throw LoadError("parameter '" + p.name + "' has shape " + shape_str(shape) + " in checkpoint, model expects " +
                      shape_str(p.value.shape()));
    }
    const auto values = detail::from_words<T>(rec->words);
    std::copy(values.begin(), values.end(), p.value.mutable_data().begin());
    if (optimizer) {
      const auto* m = ckpt.find("adam.m/" + p.name);
      const auto* v = ckpt.find("adam.v/" + p.name);
      if (m && v) {
        optimizer->first_moments()[k] = detail::from_words<T>(m->words);
        optimizer->second_moments()[k] = detail::from_words<T>(v->words);
      }
    }
  }
  if (optimizer) {
    if (const auto* steps = ckpt.find("meta.adam_steps"); steps && steps->words.size() == 2) {
      optimizer->set_steps(static_cast<std::uint64_t>(steps->words[0]) |
                           (static_cast<std::uint64_t>(steps->words[1]) << 32));
    }
  }
  if (rng) {
    if (const auto* r = ckpt.find("meta.rng")) {
      std::istringstream is(detail::unpack_text(r->words));
      is >> *rng;
      if (!is) throw FormatError("checkpoint RNG state is malformed");
    }
  }
}

}  // namespace tfwf
