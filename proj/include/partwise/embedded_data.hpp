#pragma once

// Data files compiled into the library (generated at build time).
namespace partwise::embedded {

extern const char* const kDefaultTemplatesJson;
extern const char* const kDefaultTreeJson;

}  // namespace partwise::embedded
