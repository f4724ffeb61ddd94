#pragma once

#include <string>
#include <string_view>

#include "emoface/facs/au_map.hpp"
#include "emoface/tead/records.hpp"

namespace emoface::tead {

/// Annotation request for one transcript. Deterministic; contains the
/// transcript verbatim exactly once, every AU label of `au_table` with its
/// FACS name, and the required response format (a ```json fenced object with
/// "tags", "aus" and "situation").
std::string build_annotation_prompt(const CorpusRecord& record, const facs::AUBlendshapeMap& au_table);

/// Parses an annotator reply. The JSON object may be fenced (```json ... ```)
/// or be the whole reply. "aus" is a 36-element array of 0/1 (a
/// comma-separated string of bits is accepted too). Throws MalformedResponse
/// on a missing field, wrong AU count, non-binary AU value, a tag count
/// outside 3..5 after normalisation, or an empty situation.
Annotation parse_annotation(std::string_view raw);

/// Renders an annotation in the mandated reply format (used for fixtures).
std::string format_annotation_response(const Annotation& a);

}  // namespace emoface::tead
