// Copyright 2026 The hwnas Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hwnas/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "hwnas/errors.hpp"

namespace hwnas {

static_assert(std::endian::native == std::endian::little,
              "checkpoint IO assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'H', 'W', 'N', 'A', 'S', 'C', 'K', 'P'};
constexpr std::uint32_t kMaxString = 1U << 24;
constexpr std::uint32_t kMaxRank = 8;

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

void put_string(std::ostream& out, const std::string& s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <typename T>
T get(std::istream& in) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T)))
    throw ParseError("checkpoint: truncated file");
  return value;
}

std::string get_string(std::istream& in) {
  const auto len = get<std::uint32_t>(in);
  if (len > kMaxString) throw ParseError("checkpoint: string too long");
  std::string s(len, '\0');
  if (len > 0 && !in.read(s.data(), len)) throw ParseError("checkpoint: truncated file");
  return s;
}

}  // namespace

const NamedTensor& Checkpoint::tensor(std::string_view name) const {
  for (const NamedTensor& t : tensors)
    if (t.name == name) return t;
  throw LookupError("checkpoint: no tensor '" + std::string(name) + "'");
}

bool Checkpoint::has_tensor(std::string_view name) const {
  for (const NamedTensor& t : tensors)
    if (t.name == name) return true;
  return false;
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw UsageError("checkpoint: cannot write " + path.string());
    out.write(kMagic, sizeof(kMagic));
    put<std::uint32_t>(out, kCheckpointVersion);
    put_string(out, ckpt.kind);
    put_string(out, ckpt.metadata);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.tensors.size()));
    for (const NamedTensor& t : ckpt.tensors) {
      std::int64_t count = 1;
      for (std::int64_t d : t.shape) count *= d;
      if (count != static_cast<std::int64_t>(t.data.size()))
        throw DimensionError("checkpoint: tensor '" + t.name +
                             "' data does not match its shape");
      put_string(out, t.name);
      put<std::uint32_t>(out, static_cast<std::uint32_t>(t.shape.size()));
      for (std::int64_t d : t.shape) put<std::int64_t>(out, d);
      out.write(reinterpret_cast<const char*>(t.data.data()),
                static_cast<std::streamsize>(t.data.size() * sizeof(double)));
    }
    if (!out) throw UsageError("checkpoint: write failed for " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("checkpoint: cannot open " + path.string());
  char magic[sizeof(kMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw ParseError("checkpoint: bad magic in " + path.string());
  const auto version = get<std::uint32_t>(in);
  if (version != kCheckpointVersion)
    throw ParseError("checkpoint: unsupported version " + std::to_string(version));
  Checkpoint ckpt;
  ckpt.kind = get_string(in);
  ckpt.metadata = get_string(in);
  const auto count = get<std::uint32_t>(in);
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor t;
    t.name = get_string(in);
    const auto rank = get<std::uint32_t>(in);
    if (rank > kMaxRank) throw ParseError("checkpoint: rank too large");
    std::int64_t n = 1;
    for (std::uint32_t r = 0; r < rank; ++r) {
      const auto d = get<std::int64_t>(in);
      if (d < 0 || d > (std::int64_t{1} << 32)) throw ParseError("checkpoint: bad dim");
      t.shape.push_back(d);
      n *= d;
    }
    if (n > (std::int64_t{1} << 32)) throw ParseError("checkpoint: tensor too large");
    t.data.resize(static_cast<std::size_t>(n));
    if (n > 0 && !in.read(reinterpret_cast<char*>(t.data.data()),
                          static_cast<std::streamsize>(n * sizeof(double))))
      throw ParseError("checkpoint: truncated tensor '" + t.name + "'");
    ckpt.tensors.push_back(std::move(t));
  }
  return ckpt;
}

NamedTensor to_tensor(std::string name, const Eigen::MatrixXd& m) {
  NamedTensor t{std::move(name), {m.rows(), m.cols()}, {}};
  t.data.resize(static_cast<std::size_t>(m.size()));
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      t.data.data(), m.rows(), m.cols()) = m;
  return t;
}

NamedTensor to_tensor(std::string name, const Eigen::VectorXd& v) {
  return {std::move(name), {v.size()}, std::vector<double>(v.data(), v.data() + v.size())};
}

Eigen::MatrixXd matrix_from(const NamedTensor& t) {
  if (t.shape.size() != 2) throw DimensionError("checkpoint: '" + t.name + "' is not 2-D");
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                        Eigen::RowMajor>>(t.data.data(), t.shape[0],
                                                          t.shape[1]);
}

Eigen::VectorXd vector_from(const NamedTensor& t) {
  if (t.shape.size() != 1) throw DimensionError("checkpoint: '" + t.name + "' is not 1-D");
  return Eigen::Map<const Eigen::VectorXd>(t.data.data(), t.shape[0]);
}

void append_model(Checkpoint& ckpt, const GcnModel& model, const std::string& prefix) {
  for (int l = 0; l < model.num_layers(); ++l)
    ckpt.tensors.push_back(to_tensor(prefix + "gcn.layer" + std::to_string(l),
                                     model.layers[static_cast<std::size_t>(l)]));
  if (model.has_head()) {
    ckpt.tensors.push_back(to_tensor(prefix + "head.weight", model.head.weight));
    ckpt.tensors.push_back(to_tensor(prefix + "head.bias", model.head.bias));
  }
  // A 1-element tensor keeps the transform next to the weights it belongs to.
  ckpt.tensors.push_back(
      {prefix + "target.log", {1},
       {model.target == TargetTransform::kLog ? 1.0 : 0.0}});
}

GcnModel model_from(const Checkpoint& ckpt, const std::string& prefix) {
  GcnModel model;
  for (int l = 0;; ++l) {
    const std::string name = prefix + "gcn.layer" + std::to_string(l);
    if (!ckpt.has_tensor(name)) break;
    model.layers.push_back(matrix_from(ckpt.tensor(name)));
  }
  if (model.layers.empty())
    throw LookupError("checkpoint: no GCN layers under prefix '" + prefix + "'");
  for (std::size_t l = 1; l < model.layers.size(); ++l)
    if (model.layers[l].rows() != model.layers[l - 1].cols())
      throw DimensionError("checkpoint: layer widths do not chain");
  if (ckpt.has_tensor(prefix + "head.weight")) {
    model.head.weight = matrix_from(ckpt.tensor(prefix + "head.weight"));
    model.head.bias = vector_from(ckpt.tensor(prefix + "head.bias"));
    if (model.head.inputs() != model.embedding_width() ||
        model.head.bias.size() != model.head.outputs())
      throw DimensionError("checkpoint: head does not match the trunk");
  }
  if (ckpt.has_tensor(prefix + "target.log"))
    model.target = ckpt.tensor(prefix + "target.log").data.at(0) != 0.0
                       ? TargetTransform::kLog
                       : TargetTransform::kIdentity;
  return model;
}

}  // namespace hwnas
