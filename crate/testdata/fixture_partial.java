class Empty {
    public void m() {
        // <start>
        use(ghost);
        // <end>
    }
}
