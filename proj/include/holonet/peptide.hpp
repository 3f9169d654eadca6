#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace holonet {

/// The 20 standard residues in alphabetical order; residue i maps to index i+1.
inline constexpr std::string_view kAminoAcids = "ACDEFGHIKLMNPQRSTVWY";
inline constexpr std::size_t kPadIndex = 0;
inline constexpr std::size_t kVocabularySize = 21;
inline constexpr std::size_t kPeptideSlots = 11;

/// Index of one residue letter (upper or lower case); throws DataError otherwise.
std::size_t residue_index(char residue);

/// Maps a peptide to `slots` indices, right-padded with 0. Throws DataError
/// for unknown residues, empty input or peptides longer than `slots`.
std::vector<std::size_t> encode_peptide(std::string_view peptide, std::size_t slots = kPeptideSlots);

}  // namespace holonet
