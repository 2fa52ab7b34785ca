pub mod extension_oracle;
pub mod hardness_oracle;
