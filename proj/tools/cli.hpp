#pragma once

namespace gscout {

/// Entry point of the gscout tool. Exit codes: 0 success, 1 runtime failure,
/// 2 configuration or usage error.
int cli_main(int argc, char** argv);

}  // namespace gscout
