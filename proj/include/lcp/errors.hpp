#pragma once

#include <stdexcept>
#include <string>

namespace lcp {

// Everything user-facing derives from lcp::error so the CLI can catch a
// single type at the top level and report to stderr.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct schema_error : error { using error::error; };     // missing or unmappable columns
struct parse_error : error { using error::error; };      // unparsable cell contents
struct integrity_error : error { using error::error; };  // data invariant violations
struct lookup_error : error { using error::error; };     // unknown vehicle/frame
struct config_error : error { using error::error; };     // bad run or generator configuration
struct fit_error : error { using error::error; };        // degenerate input or divergence while training
struct io_error : error { using error::error; };         // file open/read/write failures

}  // namespace lcp
