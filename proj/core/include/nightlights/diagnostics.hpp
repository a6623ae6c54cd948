/*
 * Copyright 2026 the nightlights authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef NIGHTLIGHTS_DIAGNOSTICS_HPP
#define NIGHTLIGHTS_DIAGNOSTICS_HPP

#include <string>
#include <utility>
#include <vector>

namespace nightlights {

/// Collects non-fatal warnings raised while parsing or transforming data.
/// Functions that can warn take a nullable Diagnostics*; nullptr discards.
class Diagnostics {
public:
  void warn(std::string message) { messages_.push_back(std::move(message)); }

  const std::vector<std::string>& warnings() const { return messages_; }
  bool empty() const { return messages_.empty(); }
  void clear() { messages_.clear(); }

private:
  std::vector<std::string> messages_;
};

inline void warn(Diagnostics* diag, std::string message) {
  if (diag != nullptr) {
    diag->warn(std::move(message));
  }
}

}  // namespace nightlights

#endif  // NIGHTLIGHTS_DIAGNOSTICS_HPP
