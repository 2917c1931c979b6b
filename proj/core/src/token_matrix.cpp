#include "lirlab/token_matrix.hpp"

namespace lirlab {

template class BasicTokenMatrix<float>;
template class BasicTokenMatrix<double>;

}  // namespace lirlab
