#include "holonet/peptide.hpp"

#include "holonet/error.hpp"

#include <cctype>
#include <string>

namespace holonet {

std::size_t residue_index(char residue) {
    const char upper = static_cast<char>(std::toupper(static_cast<unsigned char>(residue)));
    const auto pos = kAminoAcids.find(upper);
    if (pos == std::string_view::npos) {
        throw DataError(std::string("unknown residue '") + residue + "'");
    }
    return pos + 1;
}

std::vector<std::size_t> encode_peptide(std::string_view peptide, std::size_t slots) {
    if (peptide.empty()) throw DataError("empty peptide");
    if (peptide.size() > slots) {
        throw DataError("peptide '" + std::string(peptide) + "' has " + std::to_string(peptide.size()) +
                        " residues, at most " + std::to_string(slots) + " allowed");
    }
    std::vector<std::size_t> out(slots, kPadIndex);
    for (std::size_t i = 0; i < peptide.size(); ++i) out[i] = residue_index(peptide[i]);
    return out;
}

}  // namespace holonet
