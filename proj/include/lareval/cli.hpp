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

#include <iosfwd>
#include <string>
#include <vector>

namespace lareval {

/// Command-line front end. `args` excludes the program name. Returns 0 on
/// success, 1 on input or validation errors (including bad flags), 2 on
/// internal errors. Diagnostics go to `err`; data goes to files or `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lareval
