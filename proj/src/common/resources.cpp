#include "vicorpus/resources.hpp"

#include <cstddef>

namespace vicorpus::embedded {
#define VICORPUS_DECLARE(name)                 \
  extern const unsigned char name##_data[];   \
  extern const std::size_t name##_size;
VICORPUS_DECLARE(record_schema)
VICORPUS_DECLARE(report_schema)
VICORPUS_DECLARE(instrument_js)
VICORPUS_DECLARE(stopwords_en)
VICORPUS_DECLARE(colormaps)
#undef VICORPUS_DECLARE
}  // namespace vicorpus::embedded

namespace vicorpus::resources {

namespace {
std::string_view view(const unsigned char* data, std::size_t size) {
  return {reinterpret_cast<const char*>(data), size};
}
}  // namespace

std::string_view record_schema() { return view(embedded::record_schema_data, embedded::record_schema_size); }
std::string_view report_schema() { return view(embedded::report_schema_data, embedded::report_schema_size); }
std::string_view instrument_script() { return view(embedded::instrument_js_data, embedded::instrument_js_size); }
std::string_view stopwords_en() { return view(embedded::stopwords_en_data, embedded::stopwords_en_size); }
std::string_view colormaps() { return view(embedded::colormaps_data, embedded::colormaps_size); }

}  // namespace vicorpus::resources
