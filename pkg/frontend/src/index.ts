export * from "./api";
export * from "./canvas";
export * from "./document";
export * from "./editor";
export * from "./lower";
export * from "./palette";
