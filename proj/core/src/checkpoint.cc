/* Copyright 2026 The KWT Authors. All Rights Reserved.

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

#include "kwt/checkpoint.h"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "kwt/error.h"
#include "kwt/serialization.h"

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

namespace kwt {

using nlohmann::json;

namespace {

template <Real T>
constexpr const char* dtype_name() {
  return sizeof(T) == 4 ? "f32" : "f64";
}

std::size_t dtype_size(const std::string& dtype) {
  if (dtype == "f32") return 4;
  if (dtype == "f64") return 8;
  throw InputError("checkpoint: unsupported dtype '" + dtype + "'");
}

template <Real T>
void read_into(Tensor<T>& t, const char* src, const std::string& dtype) {
  if (dtype == "f32") {
    for (std::size_t i = 0; i < t.size(); ++i) {
      float v;
      std::memcpy(&v, src + 4 * i, 4);
      t[i] = static_cast<T>(v);
    }
  } else {
    for (std::size_t i = 0; i < t.size(); ++i) {
      double v;
      std::memcpy(&v, src + 8 * i, 8);
      t[i] = static_cast<T>(v);
    }
  }
}

}  // namespace

template <Real T>
std::string encode_checkpoint(const KWTModel<T>& model, const json& metadata) {
  json tensors = json::array();
  std::string payload;
  model.params.visit([&](const std::string& name, const Tensor<T>& t) {
    const std::size_t nbytes = t.size() * sizeof(T);
    tensors.push_back({{"name", name},
                       {"dtype", dtype_name<T>()},
                       {"shape", t.shape()},
                       {"offset", payload.size()},
                       {"nbytes", nbytes}});
    payload.append(reinterpret_cast<const char*>(t.values().data()), nbytes);
  });
  json header = {{"format_version", kCheckpointVersion},
                 {"config", model.config},
                 {"metadata", metadata.is_null() ? json::object() : metadata},
                 {"tensors", std::move(tensors)}};
  const std::string h = header.dump();
  std::string out(kCheckpointMagic);
  const auto len = static_cast<std::uint64_t>(h.size());
  out.append(reinterpret_cast<const char*>(&len), sizeof(len));
  out += h;
  out += payload;
  return out;
}

template <Real T>
KWTModel<T> decode_impl(std::string_view bytes, json* metadata) {
  const std::size_t prefix = kCheckpointMagic.size() + sizeof(std::uint64_t);
  if (bytes.size() < prefix || bytes.substr(0, kCheckpointMagic.size()) != kCheckpointMagic) {
    throw InputError("checkpoint: bad magic (not a KWT checkpoint)");
  }
  std::uint64_t len;
  std::memcpy(&len, bytes.data() + kCheckpointMagic.size(), sizeof(len));
  if (len > bytes.size() - prefix) throw InputError("checkpoint: truncated header");
  json header;
  try {
    header = json::parse(bytes.substr(prefix, len));
  } catch (const json::exception& e) {
    throw InputError(std::string("checkpoint: malformed header: ") + e.what());
  }
  if (header.value("format_version", 0) != kCheckpointVersion) {
    throw InputError("checkpoint: unsupported format version");
  }
  const std::string_view payload = bytes.substr(prefix + len);

  KWTModel<T> model{header.at("config").get<KWTConfig>(), {}};
  model.params = KWTParams<T>::zeros(model.config);
  const json& entries = header.at("tensors");
  std::size_t index = 0;
  model.params.visit([&](const std::string& name, Tensor<T>& t) {
    if (index >= entries.size()) {
      throw ConfigError("checkpoint: missing tensor '" + name + "'");
    }
    const json& e = entries[index++];
    if (e.at("name").get<std::string>() != name) {
      throw ConfigError("checkpoint: expected tensor '" + name + "', found '" +
                        e.at("name").get<std::string>() + "'");
    }
    if (e.at("shape").get<Shape>() != t.shape()) {
      throw ConfigError("checkpoint: tensor '" + name + "' has shape " +
                        shape_string(e.at("shape").get<Shape>()) +
                        ", config implies " + shape_string(t.shape()));
    }
    const std::string dtype = e.at("dtype").get<std::string>();
    const auto offset = e.at("offset").get<std::size_t>();
    const std::size_t nbytes = t.size() * dtype_size(dtype);
    if (e.at("nbytes").get<std::size_t>() != nbytes || offset > payload.size() ||
        nbytes > payload.size() - offset) {
      throw InputError("checkpoint: tensor '" + name + "' overruns the payload");
    }
    read_into(t, payload.data() + offset, dtype);
  });
  if (index != entries.size()) {
    throw ConfigError("checkpoint: holds tensors the config does not describe");
  }
  if (metadata) *metadata = header.value("metadata", json::object());
  return model;
}

template <Real T>
KWTModel<T> decode_checkpoint(std::string_view bytes, json* metadata) {
  try {
    return decode_impl<T>(bytes, metadata);
  } catch (const json::exception& e) {
    throw InputError(std::string("checkpoint: malformed header: ") + e.what());
  }
}

template <Real T>
void save_checkpoint(const std::filesystem::path& path, const KWTModel<T>& model,
                     const json& metadata) {
  const std::string bytes = encode_checkpoint(model, metadata);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

template <Real T>
KWTModel<T> load_checkpoint(const std::filesystem::path& path, json* metadata) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  return decode_checkpoint<T>(bytes, metadata);
}

template std::string encode_checkpoint(const KWTModel<float>&, const json&);
template std::string encode_checkpoint(const KWTModel<double>&, const json&);
template KWTModel<float> decode_checkpoint<float>(std::string_view, json*);
template KWTModel<double> decode_checkpoint<double>(std::string_view, json*);
template void save_checkpoint(const std::filesystem::path&, const KWTModel<float>&,
                              const json&);
template void save_checkpoint(const std::filesystem::path&, const KWTModel<double>&,
                              const json&);
template KWTModel<float> load_checkpoint<float>(const std::filesystem::path&, json*);
template KWTModel<double> load_checkpoint<double>(const std::filesystem::path&, json*);

}  // namespace kwt
