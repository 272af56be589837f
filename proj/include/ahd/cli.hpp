// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace ahd::cli {

// Exit codes: 0 success (including penalty-completed runs), 1 usage or
// configuration error, 2 I/O failure, 3 invalid heuristic in `evaluate`.
int cli_main(int argc, char** argv);

} // namespace ahd::cli
