class SessionInfo {
    private String username;
    private int count;

    String describe() {
        count = count + 1;
        return username;
    }

    public void audit() {
        // <start>
        log(userName);
        // <end>
    }
}
