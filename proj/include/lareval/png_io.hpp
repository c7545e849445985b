// Copyright 2026 The lareval Authors
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

#pragma once

#include <filesystem>

#include "lareval/mask.hpp"

namespace lareval {

/// Reads any PNG as 8-bit grayscale; nonzero samples are foreground.
BinaryMask read_png_mask(const std::filesystem::path& path);

/// Writes foreground as 255 and background as 0, 8-bit grayscale.
void write_png_mask(const std::filesystem::path& path, const BinaryMask& mask);

}  // namespace lareval
