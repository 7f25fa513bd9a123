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

#ifndef HWNAS_CHECKPOINT_HPP_
#define HWNAS_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hwnas/gcn.hpp"

namespace hwnas {

// Container layout (all integers little-endian):
//   magic "HWNASCKP" | u32 version (1)
//   u32 len | kind bytes        (unary_latency, unary_accuracy, binary)
//   u32 len | metadata bytes    (free-form JSON)
//   u32 tensor count
//   per tensor: u32 len | name | u32 rank | i64 dims[rank] | f64 data
// Tensor data is row-major.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedTensor {
  std::string name;
  std::vector<std::int64_t> shape;
  std::vector<double> data;

  friend bool operator==(const NamedTensor&, const NamedTensor&) = default;
};

struct Checkpoint {
  std::string kind;
  std::string metadata;
  std::vector<NamedTensor> tensors;

  const NamedTensor& tensor(std::string_view name) const;  // LookupError
  bool has_tensor(std::string_view name) const;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& path);

NamedTensor to_tensor(std::string name, const Eigen::MatrixXd& m);
NamedTensor to_tensor(std::string name, const Eigen::VectorXd& v);
Eigen::MatrixXd matrix_from(const NamedTensor& t);
Eigen::VectorXd vector_from(const NamedTensor& t);

// Tensors gcn.layer<l>, head.weight, head.bias and a target-transform entry
// in the metadata.
void append_model(Checkpoint& ckpt, const GcnModel& model,
                  const std::string& prefix = "");
GcnModel model_from(const Checkpoint& ckpt, const std::string& prefix = "");

}  // namespace hwnas

#endif  // HWNAS_CHECKPOINT_HPP_
