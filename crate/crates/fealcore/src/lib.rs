//! Tensorized finite element kernels.
//!
//! The crate implements a small but complete FEM pipeline in which every
//! stage is expressed over batched dense tensors and a closed set of backend
//! kernels, so the whole engine can be switched between a serial reference
//! implementation and a rayon data-parallel one:
//!
//! * [`backend`]: the kernel contract (row lexsort/dedup, scattered
//!   accumulation, cell/quadrature contractions) with serial and parallel
//!   implementations and a deterministic-reduction mode.
//! * [`mesh`]: unstructured interval / triangle / quadrangle / tetrahedron
//!   meshes; topology is derived by sorting and deduplicating entity tensors.
//! * [`quadrature`]: symmetric simplex rules and Gauss-Legendre tensor
//!   products with exactness guarantees.
//! * [`space`]: arbitrary-order Lagrange spaces, DoF management, and
//!   vector-valued (interleaved-component) spaces.
//! * [`sparse`]: COO/CSR matrices with an optional leading batch axis and
//!   pattern-only variants.
//! * [`fem`]: element integrators (diffusion, mass, linear elasticity,
//!   sources), broadcast assembly, Dirichlet elimination, and error norms.
//! * [`solver`]: Jacobi-preconditioned conjugate gradients plus a dense LU
//!   fallback.

// Index loops here usually co-address several flat buffers; iterator form
// would obscure the stencil. Negated float comparisons in validation guards
// are deliberate: `!(x > 0.0)` rejects NaN where `x <= 0.0` would let it by.
#![allow(clippy::needless_range_loop)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod backend;
pub mod error;
pub mod fem;
pub mod mesh;
pub mod quadrature;
pub mod solver;
pub mod space;
pub mod sparse;
pub mod tensor;

pub use backend::{Backend, Contraction, UniqueRows};
pub use error::{FealError, Result};
pub use tensor::Tensor;
