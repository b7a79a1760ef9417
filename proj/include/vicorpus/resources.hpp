#pragma once

#include <string_view>

// Data files compiled into the library.
namespace vicorpus::resources {

std::string_view record_schema();
std::string_view report_schema();
std::string_view instrument_script();
std::string_view stopwords_en();
std::string_view colormaps();

}  // namespace vicorpus::resources
