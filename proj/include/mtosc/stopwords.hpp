#pragma once

#include <set>
#include <string>

namespace mtosc::decider {

using WordSet = std::set<std::string>;

// Bundled list of roughly a hundred common English function words,
// lowercase. data/stopwords_en.txt ships the same list for embedders that
// prefer a file-based override.
const WordSet& default_stopwords();

// Loads one lowercase word per line (UTF-8, blank lines ignored).
// Throws IoError when the file cannot be read.
WordSet load_stopwords(const std::string& path);

}  // namespace mtosc::decider
