#pragma once

#include <string_view>

// Default data tables compiled into the library (see core/data/).
namespace emoface::embedded {

std::string_view au_blendshape_map_csv();
std::string_view stopwords_txt();
std::string_view synonyms_tsv();

}  // namespace emoface::embedded
